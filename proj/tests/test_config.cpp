#include <algorithm>
#include <sstream>
#include <string>

#include "catch_amalgamated.hpp"

#include "ltesim/config.hpp"
#include "ltesim/error.hpp"

using namespace ltesim;
using namespace ltesim::sim;

namespace {

ExperimentConfig parse(const std::string& text, std::optional<Experiment> e = std::nullopt)
{
    std::istringstream in(text);
    return parse_config(in, e);
}

} // namespace

TEST_CASE("defaults per experiment", "[config]")
{
    const auto mu = default_config(Experiment::MuGain);
    CHECK(mu.sweep_variable == "k");
    CHECK(mu.sweep_values == std::vector<double>{2, 5, 10, 20, 40, 64});
    CHECK(mu.n_drops == 50);
    CHECK(mu.n_tti == 200);
    CHECK_NOTHROW(mu.validate());
    for (auto e : {Experiment::Das, Experiment::Femto, Experiment::Cfo, Experiment::PilotPower}) {
        const auto c = default_config(e);
        CHECK(c.experiment == e);
        CHECK_NOTHROW(c.validate());
        CHECK(parse_experiment(to_string(e)) == e);
    }
    CHECK(default_config(Experiment::PilotPower).sweep_values == std::vector<double>{0, 100, 200, 300, 400, 500});
}

TEST_CASE("INI parsing with lists and overrides", "[config]")
{
    const auto c = parse("[run]\n"
                         "experiment = das\n"
                         "seed = 42 ; trailing comment\n"
                         "n_drops = 7\n"
                         "# full-line comment\n"
                         "[das]\n"
                         "modes = zf-perfect, pu2rc-quantized\n"
                         "floor_dbm = -80\n"
                         "[sweep]\n"
                         "values = 2, 8\n");
    CHECK(c.experiment == Experiment::Das);
    CHECK(c.seed == 42);
    CHECK(c.n_drops == 7);
    CHECK(c.das.modes == std::vector<DasMode>{DasMode::ZfPerfect, DasMode::Pu2rcQuantized});
    REQUIRE(c.das.floor_dbm.has_value());
    CHECK(*c.das.floor_dbm == -80.0);
    CHECK(c.sweep_values == std::vector<double>{2, 8});

    const auto automatic = parse("[das]\nfloor_dbm = auto\n", Experiment::Das);
    CHECK_FALSE(automatic.das.floor_dbm.has_value());

    std::istringstream in("[run]\nseed = 1\n");
    const auto o = parse_config(in, Experiment::MuGain, {parse_override("run.seed=9"), parse_override("mimo.antennas = 1x1,4x4")});
    CHECK(o.seed == 9);
    CHECK(o.mimo.antennas == std::vector<AntennaConfig>{{1, 1}, {4, 4}});
    CHECK(parse_antenna_config("2x2") == AntennaConfig{2, 2});
    CHECK(to_string(AntennaConfig{4, 4}) == "4x4");
}

TEST_CASE("every known key is accepted and unknown keys are named", "[config]")
{
    const auto& keys = known_keys();
    CHECK(std::is_sorted(keys.begin(), keys.end()));
    CHECK(std::find(keys.begin(), keys.end(), "mimo.rs_overhead") != keys.end());
    CHECK(std::find(keys.begin(), keys.end(), "das.mmse_receiver") != keys.end());

    try {
        parse("[run]\nseeed = 3\n", Experiment::Cfo);
        FAIL("unknown key accepted");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("run.seeed") != std::string::npos);
    }
    CHECK_THROWS_AS(parse("[bogus]\nx = 1\n", Experiment::Cfo), ConfigError);
    CHECK_THROWS_AS(parse("[run]\nseed = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse("[run]\nexperiment = warp\n"), ConfigError);
    CHECK_THROWS_AS(parse_override("no-equals-sign"), ConfigError);
}

TEST_CASE("invalid values are rejected", "[config]")
{
    CHECK_THROWS_AS(parse("[run]\nn_drops = 0\n", Experiment::Cfo), ConfigError);
    CHECK_THROWS_AS(parse("[run]\nn_drops = many\n", Experiment::Cfo), ConfigError);
    CHECK_THROWS_AS(parse("[mimo]\nantennas = 3x3\n", Experiment::MuGain), ConfigError);
    CHECK_THROWS_AS(parse("[sweep]\nvalues = 5, 2\n", Experiment::MuGain), ConfigError);
    CHECK_THROWS_AS(parse("[sweep]\nvalues = 0, 11\n", Experiment::Femto), ConfigError);
    CHECK_THROWS_AS(parse("[sweep]\nvalues = 0, 600\n", Experiment::PilotPower), ConfigError);
    CHECK_THROWS_AS(parse("[layout]\nisd_m = -1\n", Experiment::Das), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/dir/config.ini"), IoError);
}
