#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "nlbode/commands.hpp"
#include "nlbode/config.hpp"

namespace {

using nlbode::config::AnalysisConfig;
using nlbode::config::ConfigError;

struct Common {
    std::string config_path;
    std::string out_dir;
    bool json = false;
    std::optional<int> resolution;
    std::optional<std::uint64_t> seed;
    std::string grid;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config_path, "JSON configuration file (defaults reproduce the DC-motor example)");
    app->add_option("--out", c.out_dir, "Output directory");
    app->add_flag("--json", c.json, "Print only the summary JSON on stdout");
    app->add_option("--resolution", c.resolution, "Boundary samples per full circle")->check(CLI::Range(16, 1 << 20));
    app->add_option("--seed", c.seed, "Probe seed");
    app->add_option("--grid", c.grid, "Frequency grid LO:HI:PPD (rad/s, points per decade)");
}

AnalysisConfig build_config(const Common& c) {
    AnalysisConfig cfg = c.config_path.empty() ? AnalysisConfig::defaults() : nlbode::config::load(c.config_path);
    if (!c.out_dir.empty()) {
        cfg.out_dir = c.out_dir;
    }
    if (c.resolution) {
        cfg.resolution = *c.resolution;
    }
    if (c.seed) {
        cfg.seed = *c.seed;
    }
    if (!c.grid.empty()) {
        nlbode::config::apply_grid_spec(cfg, c.grid);
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonlinear Bode diagrams from scaled relative graphs"};
    app.require_subcommand(1);

    Common common;
    auto* bode = app.add_subcommand("bode", "Gain-bound sweeps of the sensitivity and loop-transfer LFRs");
    add_common(bode, common);

    auto* srg = app.add_subcommand("srg", "Dump one region boundary as CSV");
    add_common(srg, common);
    std::string system = "S";
    std::string block = "bound";
    std::string space = "full";
    double omega = 1.0;
    srg->add_option("--system", system, "S or L");
    srg->add_option("--block", block, "zw, out_w, z_in, out_in, phi, phi_inv or bound");
    srg->add_option("--space", space, "sinusoidal, harmonic, subharmonic or full");
    srg->add_option("--omega", omega, "Base frequency (rad/s)");

    auto* simulate = app.add_subcommand("simulate", "Simulate the closed loop for one reference");
    add_common(simulate, common);
    std::string reference = "r1";
    simulate->add_option("--reference", reference, "Reference id from the config");

    auto* verify = app.add_subcommand("verify", "Run the acceptance matrix and write verify.json");
    add_common(verify, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : nlbode::cli::kExitConfig;
    }

    AnalysisConfig cfg;
    try {
        cfg = build_config(common);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return nlbode::cli::kExitConfig;
    }

    const nlbode::cli::Streams io{std::cout, std::cerr, common.json};
    try {
        if (*bode) {
            return nlbode::cli::cmd_bode(cfg, io);
        }
        if (*srg) {
            return nlbode::cli::cmd_srg(cfg, system, block, space, omega, io);
        }
        if (*simulate) {
            return nlbode::cli::cmd_simulate(cfg, reference, io);
        }
        return nlbode::cli::cmd_verify(cfg, io);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return nlbode::cli::kExitFailure;
    }
}
