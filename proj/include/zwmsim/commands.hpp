#pragma once

#include <filesystem>
#include <optional>
#include <sstream>
#include <string>

#include "zwmsim/biphoton_state.hpp"
#include "zwmsim/config.hpp"
#include "zwmsim/detection.hpp"
#include "zwmsim/io.hpp"
#include "zwmsim/zwm_spectrum.hpp"

namespace zwmsim {

struct CmdOptions {
    std::filesystem::path out_dir = ".";
    std::optional<std::uint64_t> seed_override;
    bool paper_exact = false;
};

namespace detail {

inline json params_json(const CavityParams& p, const CombIndexRange& comb) {
    return {{"gamma", p.gamma},
            {"delta_omega", p.delta_omega},
            {"tau", p.tau},
            {"omega_s", p.omega_s},
            {"omega_p", p.omega_p},
            {"omega_i", p.omega_i()},
            {"finesse", p.finesse()},
            {"m_min", comb.m_min},
            {"m_max", comb.m_max},
            {"comb_truncation_warning", comb.truncation_warning}};
}

} // namespace detail

/// Writes spectrum.csv (omega, S_full, S_good_cavity, S_comb_resolved) and
/// spectrum.json with parameters and cross-fidelity peak deviations.
inline void cmd_spectrum(const SimConfig& cfg, const CmdOptions& opts) {
    const CombIndexRange comb = resolved_comb(cfg);
    const FrequencyGrid grid = resolved_grid(cfg, comb);

    const Spectrum full = compute_spectrum_full(cfg.cavity, cfg.sample, comb, cfg.phi, cfg.varphi,
                                                grid, opts.paper_exact);
    const Spectrum good = compute_spectrum_good_cavity(cfg.cavity, cfg.sample, comb, cfg.phi,
                                                       cfg.varphi, grid, opts.paper_exact);
    const Spectrum resolved = compute_spectrum_comb_resolved(cfg.cavity, cfg.sample, comb, cfg.phi,
                                                             cfg.varphi, grid, opts.paper_exact);

    double full_vs_good = 0.0;
    double good_vs_resolved = 0.0;
    for (double omega : comb_peak_frequencies(cfg.cavity, comb)) {
        const double sf = spectrum_point_full(cfg.cavity, cfg.sample, comb, cfg.phi, cfg.varphi,
                                              omega, opts.paper_exact);
        const double sg = spectrum_point_good_cavity(cfg.cavity, cfg.sample, comb, cfg.phi,
                                                     cfg.varphi, omega, opts.paper_exact);
        if (sf > 0.0)
            full_vs_good = std::max(full_vs_good, std::abs(sf - sg) / sf);
    }
    {
        // resolved vs good on the shared grid, relative to the good-cavity peak
        const double peak = good.peak();
        if (peak > 0.0)
            for (int i = 0; i < grid.n_points; ++i)
                good_vs_resolved =
                    std::max(good_vs_resolved, std::abs(good.values[i] - resolved.values[i]) / peak);
    }

    const std::string hash = config_hash(cfg);
    std::filesystem::create_directories(opts.out_dir);
    {
        auto out = open_output(opts.out_dir / "spectrum.csv");
        out << "# config_hash=" << hash << "\n";
        out << "omega,S_full,S_good_cavity,S_comb_resolved\n";
        for (int i = 0; i < grid.n_points; ++i)
            out << fmt17(grid.at(i)) << ',' << fmt17(full.values[i]) << ','
                << fmt17(good.values[i]) << ',' << fmt17(resolved.values[i]) << "\n";
    }
    {
        json header;
        header["config_hash"] = hash;
        header["params"] = detail::params_json(cfg.cavity, comb);
        header["phases"] = {{"phi", cfg.phi}, {"varphi", cfg.varphi}};
        header["paper_exact_cross_term"] = opts.paper_exact;
        header["grid"] = {{"start", grid.start}, {"stop", grid.stop}, {"n_points", grid.n_points}};
        header["residual_imag"] = full.residual_imag;
        header["peak_deviation_full_vs_good_cavity"] = full_vs_good;
        header["deviation_good_cavity_vs_comb_resolved"] = good_vs_resolved;
        json warnings = json::array();
        for (const auto& w : good.warnings)
            warnings.push_back(w);
        if (comb.truncation_warning)
            warnings.push_back("comb range clamped to the hard mode cap (flat envelope)");
        header["warnings"] = warnings;
        auto out = open_output(opts.out_dir / "spectrum.json");
        out << header.dump(2) << "\n";
    }
}

/// Writes visibility.csv (m, omega_signal, omega_idler, V_m, T_hat) and a
/// JSON report; for mixtures the report compares T_hat with the true |T|.
inline void cmd_visibility(const SimConfig& cfg, const CmdOptions& opts) {
    const CombIndexRange comb = resolved_comb(cfg);
    const VisibilityTable table = visibility(cfg.cavity, cfg.sample, comb);
    const std::string hash = config_hash(cfg);

    std::filesystem::create_directories(opts.out_dir);
    {
        auto out = open_output(opts.out_dir / "visibility.csv");
        out << "# config_hash=" << hash << "\n";
        out << "m,omega_signal,omega_idler,V_m,T_hat\n";
        for (const auto& row : table.rows)
            out << row.m << ',' << fmt17(row.omega_signal) << ',' << fmt17(row.omega_idler) << ','
                << fmt17(row.visibility) << ',' << fmt17(row.t_hat) << "\n";
    }
    {
        json header;
        header["config_hash"] = hash;
        header["params"] = detail::params_json(cfg.cavity, comb);
        if (cfg.sample.kind == SampleModel::Kind::LorentzianMixture) {
            json rows = json::array();
            double max_err = 0.0;
            for (const auto& row : table.rows) {
                const double t_true = std::abs(transmissivity(cfg.sample, row.omega_idler));
                const double err = std::abs(row.t_hat - t_true);
                max_err = std::max(max_err, err);
                rows.push_back({{"m", row.m},
                                {"t_hat", row.t_hat},
                                {"t_true", t_true},
                                {"abs_error", err}});
            }
            header["reconstruction"] = {{"rows", std::move(rows)}, {"max_abs_error", max_err}};
        }
        auto out = open_output(opts.out_dir / "visibility.json");
        out << header.dump(2) << "\n";
    }
}

/// Runs the Monte Carlo phase sweep; writes counts.csv and estimates.json.
/// Low statistics in any retained mode propagate as low_statistics_error.
inline void cmd_montecarlo(const SimConfig& cfg, const CmdOptions& opts) {
    if (!cfg.montecarlo)
        throw config_error("montecarlo: section missing");
    const CombIndexRange comb = resolved_comb(cfg);
    const SpectrometerModel spectrometer = resolved_spectrometer(cfg, comb);
    const std::uint64_t seed = opts.seed_override.value_or(cfg.montecarlo->seed);

    const MeasurementRun run =
        run_phase_sweep(cfg.cavity, cfg.sample, comb, cfg.varphi, cfg.montecarlo->phases,
                        spectrometer, cfg.montecarlo->n_photons_per_phase, seed,
                        opts.paper_exact);

    const std::string hash = config_hash(cfg);
    std::filesystem::create_directories(opts.out_dir);
    {
        auto out = open_output(opts.out_dir / "counts.csv");
        out << "# config_hash=" << hash << " seed=" << seed << "\n";
        out << "phase,bin_center,counts\n";
        for (std::size_t i = 0; i < run.phases.size(); ++i)
            for (int b = 0; b < spectrometer.n_bins(); ++b)
                out << fmt17(run.phases[i]) << ',' << fmt17(spectrometer.bin_center(b)) << ','
                    << run.counts[i][b] << "\n";
    }
    {
        json modes = json::array();
        for (int m = comb.m_min; m <= comb.m_max; ++m) {
            const VisibilityEstimate est = estimate_visibility(run, m);
            modes.push_back({{"m", m},
                             {"V_est", est.visibility},
                             {"std_err", est.std_err},
                             {"T_hat", invert_visibility(std::min(1.0, est.visibility))}});
        }
        json header;
        header["config_hash"] = hash;
        header["seed"] = seed;
        header["n_photons_per_phase"] = cfg.montecarlo->n_photons_per_phase;
        header["params"] = detail::params_json(cfg.cavity, comb);
        header["comb_resolving_spectrometer"] = spectrometer.comb_resolving(cfg.cavity.delta_omega);
        header["modes"] = std::move(modes);
        auto out = open_output(opts.out_dir / "estimates.json");
        out << header.dump(2) << "\n";
    }
}

/// Regime checks only; never runs a simulation. Warnings do not fail.
inline std::string cmd_validate(const SimConfig& cfg) {
    const CombIndexRange comb = resolved_comb(cfg);
    const FrequencyGrid grid = resolved_grid(cfg, comb);
    const SpectrometerModel spectrometer = resolved_spectrometer(cfg, comb);
    std::ostringstream out;

    auto check = [&out](bool ok, const std::string& name, const std::string& msg) {
        out << (ok ? "[pass] " : "[warn] ") << name << ": " << msg << "\n";
    };
    const double ratio = cfg.cavity.gamma / cfg.cavity.delta_omega;
    check(ratio <= 0.1, "good-cavity limit",
          "gamma/delta_omega = " + fmt17(ratio) + (ratio <= 0.1 ? " (<= 0.1)" : " (> 0.1)"));
    const double mismatch = cfg.cavity.delta_omega * std::abs(cfg.cavity.tau);
    check(mismatch <= 2.0 * kPi / 10.0, "phase-mismatch regime",
          "delta_omega*|tau| = " + fmt17(mismatch) +
              (mismatch <= 2.0 * kPi / 10.0 ? " (<= 2*pi/10)" : " (> 2*pi/10), violates delta_omega << 1/|tau|"));
    check(grid.spacing() <= cfg.cavity.gamma / 10.0, "grid resolution",
          "spacing = " + fmt17(grid.spacing()) + ", gamma/10 = " + fmt17(cfg.cavity.gamma / 10.0));
    check(spectrometer.comb_resolving(cfg.cavity.delta_omega), "comb-resolving spectrometer",
          "resolution_sigma = " + fmt17(spectrometer.resolution_sigma) + ", delta_omega/4 = " +
              fmt17(cfg.cavity.delta_omega / 4.0));
    if (comb.truncation_warning)
        out << "[warn] comb range: clamped to the hard mode cap (flat phase-mismatch envelope)\n";
    return out.str();
}

} // namespace zwmsim
