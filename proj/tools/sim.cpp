// Command-line front-end: runs a named experiment and writes CSV results.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "irsim/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Link-level simulator for surface-assisted high-mobility transmission"};

    std::string experiment;
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    int trials = 0;

    app.add_option("experiment", experiment, "Experiment to run")
        ->required()
        ->check(CLI::IsMember({"fig3", "fig4", "fig5", "custom"}));
    app.add_option("--config", config_path, "Key-value config file (defaults apply when omitted)")
        ->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "Output directory for CSV files and the run manifest")
        ->capture_default_str();
    auto* seed_opt = app.add_option("--seed", seed, "Override master_seed");
    auto* trials_opt = app.add_option("--trials", trials, "Override trial count")
                           ->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    irsim::SystemConfig config;
    if (!config_path.empty()) {
        try {
            config = irsim::load_config(config_path);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
    }

    irsim::RunOverrides overrides;
    if (seed_opt->count() > 0) {
        overrides.seed = seed;
    }
    if (trials_opt->count() > 0) {
        overrides.trials = trials;
    }
    return irsim::run_named(experiment, config, out_dir, overrides);
}
