#include "colts/experiments.hpp"

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

int main(int argc, char** argv) {
    CLI::App app{"Perturbation-based safe linear bandit experiments"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::vector<std::uint64_t> seeds;
    std::string out_dir;
    unsigned threads = 0;

    for (auto cmd : {colts::Command::Run, colts::Command::SweepGamma, colts::Command::SweepM,
                     colts::Command::ResamplingTable, colts::Command::Rates, colts::Command::HardCompare,
                     colts::Command::DecoupledStudy}) {
        auto* sub = app.add_subcommand(std::string(colts::command_name(cmd)));
        sub->add_option("--config", config_path, "INI experiment file")->required();
        sub->add_option("--seeds", seeds, "Comma-separated seeds")->delimiter(',');
        sub->add_option("--out", out_dir, "Output directory");
        sub->add_option("--threads", threads, "Worker threads");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        const auto command = colts::parse_command(app.get_subcommands().front()->get_name());
        colts::ExperimentConfig cfg = colts::load_config(config_path);
        if (cfg.command && *cfg.command != command) {
            throw colts::ConfigError(fmt::format("config is for '{}', not '{}'", colts::command_name(*cfg.command),
                                                 colts::command_name(command)));
        }
        if (!seeds.empty()) cfg.seeds = seeds;
        if (!out_dir.empty()) cfg.out = out_dir;
        if (threads > 0) cfg.threads = threads;
        return colts::run_command(command, cfg, std::cout);
    } catch (const colts::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
