#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "zwmsim/commands.hpp"
#include "zwmsim/config.hpp"

using namespace zwmsim;
namespace fs = std::filesystem;

namespace {

json minimal_config() {
    return json{
        {"cavity",
         {{"gamma", 0.01}, {"delta_omega", 1.0}, {"tau", 0.1}, {"omega_s", 0.0}, {"omega_p", 0.0}}},
        {"sample", {{"kind", "flat"}, {"t0", 0.5}}},
        {"comb", {{"m_min", -1}, {"m_max", 1}}},
    };
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("zwmsim_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Parses a CSV written by the commands: one comment line, one header line,
/// then comma-separated numeric rows.
std::vector<std::vector<double>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);
    REQUIRE(line.rfind("# config_hash=", 0) == 0);
    std::getline(in, line); // header
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    return rows;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(ZWMSIM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("parse_config: minimal direct-form config") {
    const SimConfig cfg = parse_config(minimal_config());
    CHECK(cfg.cavity.gamma == 0.01);
    CHECK(cfg.cavity.delta_omega == 1.0);
    CHECK(cfg.cavity.tau == 0.1);
    CHECK(cfg.comb.explicit_range);
    CHECK(cfg.comb.m_min == -1);
    CHECK(cfg.comb.m_max == 1);
    CHECK(cfg.sample.kind == SampleModel::Kind::Flat);
    CHECK(cfg.sample.t0 == Complex{0.5, 0.0});
    CHECK(cfg.grid.automatic);
    CHECK(cfg.spectrometer.automatic);
    CHECK_FALSE(cfg.montecarlo.has_value());
}

TEST_CASE("parse_config: dimensionless cavity form pins delta_omega to 1") {
    json j = minimal_config();
    j["cavity"] = {{"gamma_over_fsr", 0.02}, {"fsr_times_tau", 0.3}};
    const SimConfig cfg = parse_config(j);
    CHECK(cfg.cavity.delta_omega == 1.0);
    CHECK(cfg.cavity.gamma == 0.02);
    CHECK(cfg.cavity.tau == 0.3);
}

TEST_CASE("parse_config: geometry form matches direct derivation") {
    json j = minimal_config();
    j["cavity"] = {{"gamma", 0.05},
                   {"omega_s", 10.0},
                   {"omega_p", 25.0},
                   {"geometry",
                    {{"crystal_length", 0.01},
                     {"resonator_length", 0.1},
                     {"v_gs", 0.5},
                     {"v_gi", 0.4},
                     {"c", 1.0}}}};
    const SimConfig cfg = parse_config(j);
    PhysicalGeometry geom;
    geom.crystal_length = 0.01;
    geom.resonator_length = 0.1;
    geom.v_gs = 0.5;
    geom.v_gi = 0.4;
    geom.c = 1.0;
    const CavityParams expected = derive_cavity_params(geom, 10.0, 25.0, 0.05);
    CHECK(cfg.cavity.delta_omega == expected.delta_omega);
    CHECK(cfg.cavity.tau == expected.tau);
    CHECK(cfg.cavity.omega_i() == expected.omega_i());
}

TEST_CASE("to_json round trip is a fixpoint and hashes agree") {
    json j = minimal_config();
    j["phases"] = {{"phi", 1.2}, {"varphi", 0.4}};
    j["montecarlo"] = {{"n_photons_per_phase", 1000},
                       {"seed", 9},
                       {"phases", {0.0, 1.0, 2.0, 3.0}}};
    const SimConfig a = parse_config(j);
    const SimConfig b = parse_config(to_json(a));
    CHECK(to_json(a) == to_json(b));
    CHECK(config_hash(a) == config_hash(b));

    // a semantic change must move the hash
    SimConfig c = a;
    c.phi += 1e-9;
    CHECK(config_hash(c) != config_hash(a));
}

TEST_CASE("parse_config: errors name the offending section") {
    auto message_of = [](const json& j) -> std::string {
        try {
            parse_config(j);
        } catch (const config_error& e) {
            return e.what();
        }
        return {};
    };

    json j = minimal_config();
    j.erase("cavity");
    CHECK(message_of(j).find("cavity") != std::string::npos);

    j = minimal_config();
    j["cavity"]["gamma_over_fsr"] = 0.01; // two cavity forms at once
    CHECK(message_of(j).find("cavity") != std::string::npos);

    j = minimal_config();
    j["sample"] = {{"kind", "prism"}};
    CHECK(message_of(j).find("sample") != std::string::npos);

    j = minimal_config();
    j["comb"] = {{"m_min", 1}, {"m_max", 3}}; // excludes m = 0
    CHECK(message_of(j).find("comb") != std::string::npos);

    j = minimal_config();
    j["montecarlo"] = {{"n_photons_per_phase", 100}};
    CHECK(message_of(j).find("montecarlo") != std::string::npos);

    j = minimal_config();
    j["cavity"]["gamma"] = -1.0;
    CHECK(message_of(j).find("cavity") != std::string::npos);
}

TEST_CASE("cmd_spectrum: flat sample collapses good-cavity and comb-resolved") {
    SimConfig cfg = parse_config(minimal_config());
    cfg.phi = 0.8;
    const fs::path dir = fresh_dir("spectrum_flat");
    cmd_spectrum(cfg, {dir, std::nullopt, false});

    const auto rows = read_csv(dir / "spectrum.csv");
    REQUIRE_FALSE(rows.empty());
    double peak = 0.0;
    for (const auto& row : rows)
        peak = std::max(peak, row[2]);
    REQUIRE(peak > 0.0);
    for (const auto& row : rows) {
        REQUIRE(row.size() == 4);
        CHECK(std::abs(row[2] - row[3]) <= 1e-12 * peak);
    }

    const std::string header = slurp(dir / "spectrum.json");
    const json meta = json::parse(header);
    CHECK(meta.at("config_hash").get<std::string>() == config_hash(cfg));
    CHECK(meta.at("peak_deviation_full_vs_good_cavity").get<double>() < 0.05);
}

TEST_CASE("cmd_visibility: flat extremes") {
    const fs::path dir = fresh_dir("visibility_flat");
    SimConfig cfg = parse_config(minimal_config());

    cfg.sample = SampleModel::flat({1.0, 0.0});
    cmd_visibility(cfg, {dir, std::nullopt, false});
    for (const auto& row : read_csv(dir / "visibility.csv")) {
        CHECK(row[3] == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(row[4] == doctest::Approx(1.0).epsilon(1e-7));
    }

    cfg.sample = SampleModel::flat({0.0, 0.0});
    cmd_visibility(cfg, {dir, std::nullopt, false});
    for (const auto& row : read_csv(dir / "visibility.csv")) {
        CHECK(row[3] == 0.0);
        CHECK(row[4] == 0.0);
    }
}

TEST_CASE("cmd_visibility: mixture reconstruction report is accurate") {
    SimConfig cfg = parse_config(minimal_config());
    cfg.sample = SampleModel::lorentzian_mixture({{0.0, 0.2, 0.7}, {1.0, 0.1, 0.4}});
    const fs::path dir = fresh_dir("visibility_mixture");
    cmd_visibility(cfg, {dir, std::nullopt, false});
    const json meta = json::parse(slurp(dir / "visibility.json"));
    CHECK(meta.at("reconstruction").at("max_abs_error").get<double>() < 1e-9);
}

TEST_CASE("cmd_validate: reports regime checks") {
    SimConfig cfg = parse_config(minimal_config());
    const std::string good = cmd_validate(cfg);
    CHECK(good.find("[pass] good-cavity limit") != std::string::npos);
    CHECK(good.find("[warn]") == std::string::npos);

    cfg.cavity.gamma = 0.3; // bad cavity, coarse auto grid is still gamma/10
    const std::string bad = cmd_validate(cfg);
    CHECK(bad.find("[warn] good-cavity limit") != std::string::npos);
}

TEST_CASE("CLI: exit codes and output files") {
    const fs::path dir = fresh_dir("cli");
    const fs::path cfg_path = dir / "config.json";
    {
        json j = minimal_config();
        j["montecarlo"] = {{"n_photons_per_phase", 2000},
                           {"seed", 11},
                           {"phases", {0.0, 1.57, 3.14, 4.71}}};
        std::ofstream out(cfg_path);
        out << j.dump(2);
    }

    CHECK(run_cli("validate --config " + cfg_path.string()) == 0);
    CHECK(run_cli("spectrum --config " + cfg_path.string() + " --out " + (dir / "s").string()) == 0);
    CHECK(fs::exists(dir / "s" / "spectrum.csv"));
    CHECK(fs::exists(dir / "s" / "spectrum.json"));
    CHECK(run_cli("visibility --config " + cfg_path.string() + " --out " +
                  (dir / "v").string()) == 0);
    CHECK(fs::exists(dir / "v" / "visibility.csv"));
    CHECK(run_cli("montecarlo --config " + cfg_path.string() + " --out " + (dir / "m").string() +
                  " --seed 5") == 0);
    CHECK(fs::exists(dir / "m" / "counts.csv"));
    const json est = json::parse(slurp(dir / "m" / "estimates.json"));
    CHECK(est.at("seed").get<std::uint64_t>() == 5);

    // config errors exit with 1
    const fs::path broken = dir / "broken.json";
    {
        std::ofstream out(broken);
        out << "{\"cavity\": {}}";
    }
    CHECK(run_cli("spectrum --config " + broken.string()) == 1);

    // montecarlo without its config section is a config error
    const fs::path no_mc = dir / "no_mc.json";
    {
        std::ofstream out(no_mc);
        out << minimal_config().dump(2);
    }
    CHECK(run_cli("montecarlo --config " + no_mc.string() + " --out " + (dir / "m2").string()) ==
          1);

    // low statistics exits with 3
    const fs::path starved = dir / "starved.json";
    {
        json j = minimal_config();
        j["montecarlo"] = {{"n_photons_per_phase", 20},
                           {"seed", 11},
                           {"phases", {0.0, 1.57, 3.14, 4.71}}};
        std::ofstream out(starved);
        out << j.dump(2);
    }
    CHECK(run_cli("montecarlo --config " + starved.string() + " --out " +
                  (dir / "m3").string()) == 3);
}

TEST_CASE("CLI: same config and seed give byte-identical outputs") {
    const fs::path dir = fresh_dir("cli_repro");
    const fs::path cfg_path = dir / "config.json";
    {
        json j = minimal_config();
        j["montecarlo"] = {{"n_photons_per_phase", 5000},
                           {"seed", 3},
                           {"phases", {0.0, 0.9, 1.8, 2.7, 3.6, 4.5, 5.4}}};
        std::ofstream out(cfg_path);
        out << j.dump(2);
    }
    REQUIRE(run_cli("montecarlo --config " + cfg_path.string() + " --out " +
                    (dir / "a").string()) == 0);
    REQUIRE(run_cli("montecarlo --config " + cfg_path.string() + " --out " +
                    (dir / "b").string()) == 0);
    CHECK(slurp(dir / "a" / "counts.csv") == slurp(dir / "b" / "counts.csv"));
    CHECK(slurp(dir / "a" / "estimates.json") == slurp(dir / "b" / "estimates.json"));
}
