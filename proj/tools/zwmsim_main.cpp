#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "zwmsim/commands.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool paper_exact = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Path to the JSON config file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", args.out_dir, "Output directory");
    cmd->add_option("--seed", args.seed, "Override the Monte Carlo seed from the config")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_flag("--paper-exact-cross-term", args.paper_exact,
                  "Use |T| cos(phi + varphi) in the interference bracket, discarding arg T");
}

zwmsim::CmdOptions make_options(const CommonArgs& args) {
    zwmsim::CmdOptions opts;
    opts.out_dir = args.out_dir;
    if (args.seed_set)
        opts.seed_override = args.seed;
    opts.paper_exact = args.paper_exact;
    return opts;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cavity-enhanced ZWM interferometry simulator"};
    app.require_subcommand(1);

    CommonArgs args;
    CLI::App* spectrum = app.add_subcommand("spectrum", "Compute S(omega) at all fidelity levels");
    CLI::App* visibility =
        app.add_subcommand("visibility", "Per-comb-mode visibility and |T| reconstruction");
    CLI::App* montecarlo =
        app.add_subcommand("montecarlo", "Simulate a photon-counting phase sweep");
    CLI::App* validate = app.add_subcommand("validate", "Check regime assumptions only");
    for (CLI::App* cmd : {spectrum, visibility, montecarlo, validate})
        add_common(cmd, args);

    CLI11_PARSE(app, argc, argv);

    try {
        const zwmsim::SimConfig cfg = zwmsim::load_config_file(args.config_path);
        const zwmsim::CmdOptions opts = make_options(args);
        if (spectrum->parsed())
            zwmsim::cmd_spectrum(cfg, opts);
        else if (visibility->parsed())
            zwmsim::cmd_visibility(cfg, opts);
        else if (montecarlo->parsed())
            zwmsim::cmd_montecarlo(cfg, opts);
        else if (validate->parsed())
            std::cout << zwmsim::cmd_validate(cfg);
        return 0;
    } catch (const zwmsim::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const zwmsim::low_statistics_error& e) {
        std::cerr << "low statistics: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
