#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "zwmsim/detection.hpp"
#include "zwmsim/errors.hpp"
#include "zwmsim/sample_model.hpp"
#include "zwmsim/spectral_core.hpp"

namespace zwmsim {

using json = nlohmann::ordered_json;

/// Comb truncation: either an explicit [m_min, m_max] or an envelope cut
/// handed to default_comb_range.
struct CombSpec {
    bool explicit_range = false;
    int m_min = 0;
    int m_max = 0;
    double envelope_cut = 0.5;
};

struct GridSpec {
    bool automatic = true; ///< derive span/resolution from cavity + comb
    double start = 0.0;
    double stop = 0.0;
    int n_points = 0;
};

struct SpectrometerSpec {
    bool automatic = true;
    double resolution_sigma = 0.0;
    double start = 0.0;
    double stop = 0.0;
    int n_bins = 0;
};

struct MonteCarloSpec {
    long long n_photons_per_phase = 0;
    std::uint64_t seed = 1;
    std::vector<double> phases;
};

/// Parsed simulation configuration. Cavity input may be given directly, via
/// physical geometry, or as the dimensionless pair (gamma_over_fsr,
/// fsr_times_tau); all forms are normalized to CavityParams at parse time
/// and re-serialized in the direct form.
struct SimConfig {
    CavityParams cavity;
    CombSpec comb;
    SampleModel sample = SampleModel::flat({1.0, 0.0});
    double phi = 0.0;
    double varphi = 0.0;
    GridSpec grid;
    SpectrometerSpec spectrometer;
    std::optional<MonteCarloSpec> montecarlo;
};

namespace detail {

inline double require_number(const json& j, const std::string& section, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw config_error(section + ": missing or non-numeric field '" + key + "'");
    return j.at(key).get<double>();
}

inline double number_or(const json& j, const char* key, double fallback) {
    return j.contains(key) ? j.at(key).get<double>() : fallback;
}

inline Complex parse_complex(const json& j, const std::string& section, const char* key) {
    if (!j.contains(key))
        throw config_error(section + ": missing field '" + key + "'");
    const json& v = j.at(key);
    if (v.is_number())
        return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw config_error(section + ": field '" + key + "' must be a number or [re, im]");
}

} // namespace detail

inline CavityParams parse_cavity(const json& j) {
    if (!j.is_object())
        throw config_error("cavity: section must be an object");
    const bool has_geometry = j.contains("geometry");
    const bool has_direct = j.contains("delta_omega");
    const bool has_scaled = j.contains("gamma_over_fsr");
    if (static_cast<int>(has_geometry) + static_cast<int>(has_direct) +
            static_cast<int>(has_scaled) != 1)
        throw config_error(
            "cavity: give exactly one of {delta_omega, geometry, gamma_over_fsr}");

    try {
        if (has_geometry) {
            const json& g = j.at("geometry");
            PhysicalGeometry geom;
            geom.crystal_length = detail::require_number(g, "cavity.geometry", "crystal_length");
            geom.resonator_length =
                detail::require_number(g, "cavity.geometry", "resonator_length");
            geom.v_gs = detail::require_number(g, "cavity.geometry", "v_gs");
            geom.v_gi = detail::require_number(g, "cavity.geometry", "v_gi");
            geom.c = detail::number_or(g, "c", 1.0);
            return derive_cavity_params(geom, detail::require_number(j, "cavity", "omega_s"),
                                        detail::require_number(j, "cavity", "omega_p"),
                                        detail::require_number(j, "cavity", "gamma"));
        }
        CavityParams p;
        if (has_scaled) {
            p.delta_omega = 1.0;
            p.gamma = detail::require_number(j, "cavity", "gamma_over_fsr");
            p.tau = detail::require_number(j, "cavity", "fsr_times_tau");
            p.omega_s = detail::number_or(j, "omega_s", 0.0);
            p.omega_p = detail::number_or(j, "omega_p", 0.0);
        } else {
            p.gamma = detail::require_number(j, "cavity", "gamma");
            p.delta_omega = detail::require_number(j, "cavity", "delta_omega");
            p.tau = detail::require_number(j, "cavity", "tau");
            p.omega_s = detail::require_number(j, "cavity", "omega_s");
            p.omega_p = detail::require_number(j, "cavity", "omega_p");
        }
        p.validate();
        return p;
    } catch (const numerical_error& e) {
        throw config_error(std::string("cavity: ") + e.what());
    }
}

inline SampleModel parse_sample(const json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw config_error("sample: section must be an object with a 'kind' field");
    const std::string kind = j.at("kind").get<std::string>();
    SampleModel model;
    if (kind == "flat") {
        model = SampleModel::flat(detail::parse_complex(j, "sample", "t0"));
    } else if (kind == "beam_splitter") {
        model = SampleModel::beam_splitter(detail::parse_complex(j, "sample", "t0"));
    } else if (kind == "lorentzian_mixture") {
        if (!j.contains("lines") || !j.at("lines").is_array())
            throw config_error("sample: lorentzian_mixture needs a 'lines' array");
        std::vector<LorentzianLine> lines;
        for (const json& lj : j.at("lines")) {
            LorentzianLine line;
            line.center = detail::require_number(lj, "sample.lines", "center");
            line.width = detail::require_number(lj, "sample.lines", "width");
            line.depth = detail::require_number(lj, "sample.lines", "depth");
            lines.push_back(line);
        }
        model = SampleModel::lorentzian_mixture(std::move(lines));
    } else {
        throw config_error("sample: unknown kind '" + kind + "'");
    }
    try {
        model.validate();
    } catch (const numerical_error& e) {
        throw config_error(std::string("sample: ") + e.what());
    }
    return model;
}

inline SimConfig parse_config(const json& j) {
    if (!j.is_object())
        throw config_error("config root must be a JSON object");
    if (!j.contains("cavity"))
        throw config_error("cavity: section missing");
    if (!j.contains("sample"))
        throw config_error("sample: section missing");

    SimConfig cfg;
    cfg.cavity = parse_cavity(j.at("cavity"));
    cfg.sample = parse_sample(j.at("sample"));

    if (j.contains("comb")) {
        const json& c = j.at("comb");
        if (c.contains("m_min") || c.contains("m_max")) {
            cfg.comb.explicit_range = true;
            cfg.comb.m_min = static_cast<int>(detail::require_number(c, "comb", "m_min"));
            cfg.comb.m_max = static_cast<int>(detail::require_number(c, "comb", "m_max"));
            if (cfg.comb.m_min > 0 || cfg.comb.m_max < 0)
                throw config_error("comb: requires m_min <= 0 <= m_max");
        } else {
            cfg.comb.envelope_cut = detail::require_number(c, "comb", "envelope_cut");
            if (!(cfg.comb.envelope_cut > 0.0 && cfg.comb.envelope_cut < 1.0))
                throw config_error("comb: envelope_cut must lie in (0, 1)");
        }
    }

    if (j.contains("phases")) {
        const json& p = j.at("phases");
        cfg.phi = detail::number_or(p, "phi", 0.0);
        cfg.varphi = detail::number_or(p, "varphi", 0.0);
    }

    if (j.contains("grid") && !(j.at("grid").contains("auto") && j.at("grid").at("auto").get<bool>())) {
        const json& g = j.at("grid");
        cfg.grid.automatic = false;
        cfg.grid.start = detail::require_number(g, "grid", "start");
        cfg.grid.stop = detail::require_number(g, "grid", "stop");
        cfg.grid.n_points = static_cast<int>(detail::require_number(g, "grid", "n_points"));
        if (cfg.grid.n_points < 2 || !(cfg.grid.stop > cfg.grid.start))
            throw config_error("grid: requires stop > start and n_points >= 2");
    }

    if (j.contains("spectrometer")) {
        const json& s = j.at("spectrometer");
        cfg.spectrometer.resolution_sigma = detail::number_or(s, "resolution_sigma", 0.0);
        if (cfg.spectrometer.resolution_sigma < 0.0)
            throw config_error("spectrometer: resolution_sigma must be non-negative");
        if (s.contains("start")) {
            cfg.spectrometer.automatic = false;
            cfg.spectrometer.start = detail::require_number(s, "spectrometer", "start");
            cfg.spectrometer.stop = detail::require_number(s, "spectrometer", "stop");
            cfg.spectrometer.n_bins =
                static_cast<int>(detail::require_number(s, "spectrometer", "n_bins"));
            if (cfg.spectrometer.n_bins < 1 || !(cfg.spectrometer.stop > cfg.spectrometer.start))
                throw config_error("spectrometer: requires stop > start and n_bins >= 1");
        }
    }

    if (j.contains("montecarlo")) {
        const json& m = j.at("montecarlo");
        MonteCarloSpec mc;
        mc.n_photons_per_phase = static_cast<long long>(
            detail::require_number(m, "montecarlo", "n_photons_per_phase"));
        if (mc.n_photons_per_phase < 0)
            throw config_error("montecarlo: n_photons_per_phase must be non-negative");
        mc.seed = m.contains("seed") ? m.at("seed").get<std::uint64_t>() : 1;
        if (!m.contains("phases") || !m.at("phases").is_array() || m.at("phases").empty())
            throw config_error("montecarlo: needs a non-empty 'phases' array");
        for (const json& p : m.at("phases"))
            mc.phases.push_back(p.get<double>());
        cfg.montecarlo = std::move(mc);
    }

    return cfg;
}

inline json to_json(const SimConfig& cfg) {
    json j;
    j["cavity"] = {{"gamma", cfg.cavity.gamma},
                   {"delta_omega", cfg.cavity.delta_omega},
                   {"tau", cfg.cavity.tau},
                   {"omega_s", cfg.cavity.omega_s},
                   {"omega_p", cfg.cavity.omega_p}};
    if (cfg.comb.explicit_range)
        j["comb"] = {{"m_min", cfg.comb.m_min}, {"m_max", cfg.comb.m_max}};
    else
        j["comb"] = {{"envelope_cut", cfg.comb.envelope_cut}};
    switch (cfg.sample.kind) {
    case SampleModel::Kind::Flat:
        j["sample"] = {{"kind", "flat"},
                       {"t0", {cfg.sample.t0.real(), cfg.sample.t0.imag()}}};
        break;
    case SampleModel::Kind::BeamSplitter:
        j["sample"] = {{"kind", "beam_splitter"},
                       {"t0", {cfg.sample.t0.real(), cfg.sample.t0.imag()}}};
        break;
    case SampleModel::Kind::LorentzianMixture: {
        json lines = json::array();
        for (const auto& line : cfg.sample.lines)
            lines.push_back(
                {{"center", line.center}, {"width", line.width}, {"depth", line.depth}});
        j["sample"] = {{"kind", "lorentzian_mixture"}, {"lines", std::move(lines)}};
        break;
    }
    }
    j["phases"] = {{"phi", cfg.phi}, {"varphi", cfg.varphi}};
    if (cfg.grid.automatic)
        j["grid"] = {{"auto", true}};
    else
        j["grid"] = {{"start", cfg.grid.start},
                     {"stop", cfg.grid.stop},
                     {"n_points", cfg.grid.n_points}};
    if (cfg.spectrometer.automatic)
        j["spectrometer"] = {{"resolution_sigma", cfg.spectrometer.resolution_sigma}};
    else
        j["spectrometer"] = {{"resolution_sigma", cfg.spectrometer.resolution_sigma},
                             {"start", cfg.spectrometer.start},
                             {"stop", cfg.spectrometer.stop},
                             {"n_bins", cfg.spectrometer.n_bins}};
    if (cfg.montecarlo) {
        j["montecarlo"] = {{"n_photons_per_phase", cfg.montecarlo->n_photons_per_phase},
                           {"seed", cfg.montecarlo->seed},
                           {"phases", cfg.montecarlo->phases}};
    }
    return j;
}

inline SimConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw config_error("cannot open config file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw config_error("config parse error in " + path.string() + ": " + e.what());
    }
    return parse_config(j);
}

/// FNV-1a over the canonical serialization; stamped into every output for
/// provenance.
inline std::string config_hash(const SimConfig& cfg) {
    const std::string dump = to_json(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline CombIndexRange resolved_comb(const SimConfig& cfg) {
    if (cfg.comb.explicit_range)
        return {cfg.comb.m_min, cfg.comb.m_max, false};
    return default_comb_range(cfg.cavity, cfg.comb.envelope_cut);
}

/// Auto grid: comb span plus half a free spectral range on each side,
/// sampled at gamma/10.
inline FrequencyGrid resolved_grid(const SimConfig& cfg, const CombIndexRange& comb) {
    if (!cfg.grid.automatic)
        return FrequencyGrid::linspace(cfg.grid.start, cfg.grid.stop, cfg.grid.n_points);
    const double lo = cfg.cavity.omega_s + (comb.m_min - 0.5) * cfg.cavity.delta_omega;
    const double hi = cfg.cavity.omega_s + (comb.m_max + 0.5) * cfg.cavity.delta_omega;
    const int n = static_cast<int>(std::ceil((hi - lo) / (cfg.cavity.gamma / 10.0))) + 1;
    return FrequencyGrid::linspace(lo, hi, std::max(n, 2));
}

/// Auto spectrometer: same span as the auto grid, eight bins per free
/// spectral range.
inline SpectrometerModel resolved_spectrometer(const SimConfig& cfg, const CombIndexRange& comb) {
    if (!cfg.spectrometer.automatic)
        return SpectrometerModel::uniform(cfg.spectrometer.start, cfg.spectrometer.stop,
                                          cfg.spectrometer.n_bins,
                                          cfg.spectrometer.resolution_sigma);
    const double lo = cfg.cavity.omega_s + (comb.m_min - 0.5) * cfg.cavity.delta_omega;
    const double hi = cfg.cavity.omega_s + (comb.m_max + 0.5) * cfg.cavity.delta_omega;
    const int n_bins = 8 * (comb.size() + 1);
    return SpectrometerModel::uniform(lo, hi, n_bins, cfg.spectrometer.resolution_sigma);
}

} // namespace zwmsim
