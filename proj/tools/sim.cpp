// sim: run one experiment and write <experiment>.csv and <experiment>.gp.
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ltesim/config.hpp"
#include "ltesim/error.hpp"
#include "ltesim/experiments.hpp"
#include "ltesim/results.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Seeded system-level simulator for LTE scheduling, MIMO, DAS, femto and link studies"};
    std::string experiment;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> drops;
    std::string out_dir = ".";
    std::vector<std::string> overrides;

    app.add_option("experiment", experiment, "mu-gain | das | femto | cfo | pilot-power")
        ->required()
        ->check(CLI::IsMember({"mu-gain", "das", "femto", "cfo", "pilot-power"}));
    app.add_option("--config", config_path, "INI configuration file");
    app.add_option("--seed", seed, "64-bit seed (overrides run.seed)");
    app.add_option("--drops", drops, "number of drops (overrides run.n_drops)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--override", overrides, "section.key=value, repeatable");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        std::vector<std::pair<std::string, std::string>> settings;
        for (const auto& o : overrides) settings.push_back(ltesim::sim::parse_override(o));
        if (seed) settings.emplace_back("run.seed", std::to_string(*seed));
        if (drops) settings.emplace_back("run.n_drops", std::to_string(*drops));

        const auto kind = ltesim::sim::parse_experiment(experiment);
        ltesim::sim::ExperimentConfig config;
        if (config_path.empty()) {
            std::istringstream empty;
            config = ltesim::sim::parse_config(empty, kind, settings);
        } else {
            config = ltesim::sim::load_config(config_path, kind, settings);
        }

        const ltesim::sim::ResultTable table = ltesim::sim::run_experiment(config);
        const auto files = ltesim::sim::emit_results(table, out_dir);
        std::cout << files.csv.string() << "\n" << files.plot.string() << "\n";
        return kExitOk;
    } catch (const ltesim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ltesim::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}
