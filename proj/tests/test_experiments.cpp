#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>

#include "catch_amalgamated.hpp"

#include "ltesim/error.hpp"
#include "ltesim/experiments.hpp"

using namespace ltesim;
using namespace ltesim::sim;

namespace {

std::string csv_of(const ResultTable& t)
{
    std::ostringstream out;
    write_csv(out, t);
    return out.str();
}

ExperimentConfig small_mu_gain()
{
    ExperimentConfig c = default_config(Experiment::MuGain);
    c.n_drops = 30;
    c.n_tti = 60;
    c.mimo.antennas = {{1, 1}};
    c.scheduler.kinds = {scheduling::SchedulerKind::RoundRobin, scheduling::SchedulerKind::BestCqi};
    c.sweep_values = {2, 5, 10, 20, 40};
    return c;
}

struct ThreadEnv {
    explicit ThreadEnv(const char* value) { setenv("SIM_THREADS", value, 1); }
    ~ThreadEnv() { unsetenv("SIM_THREADS"); }
};

} // namespace

TEST_CASE("run_drops is ordered and thread-count independent", "[experiments]")
{
    const auto square = [](std::size_t d) { return static_cast<double>(d * d); };
    std::vector<double> one;
    std::vector<double> many;
    {
        ThreadEnv env("1");
        CHECK(worker_count() == 1);
        one = run_drops(100, square);
    }
    {
        ThreadEnv env("7");
        CHECK(worker_count() == 7);
        many = run_drops(100, square);
    }
    CHECK(one == many);
    CHECK(one[9] == 81.0);

    const auto failing = [](std::size_t d) -> int {
        if (d == 3 || d == 5) throw InvalidParameter("drop " + std::to_string(d));
        return 0;
    };
    try {
        run_drops(10, failing);
        FAIL("no exception");
    } catch (const InvalidParameter& e) {
        CHECK(std::string(e.what()) == "drop 3");
    }
}

TEST_CASE("multi-user gain sweep", "[experiments]")
{
    const ExperimentConfig c = small_mu_gain();
    const ResultTable t = run_mu_gain(c);
    CHECK(t.sweep_variable() == "k");

    double prev = 0.0;
    for (double k : c.sweep_values) {
        const double v = t.at(k, "sum_tput.best-cqi.1x1").mean;
        CHECK(v > prev);
        prev = v;
    }
    // Round robin ignores the channel; its sum stays flat within two standard errors.
    const auto& first = t.at(c.sweep_values.front(), "sum_tput.rr.1x1");
    for (double k : c.sweep_values) {
        const auto& r = t.at(k, "sum_tput.rr.1x1");
        CHECK(std::abs(r.mean - first.mean) <= 2.0 * std::hypot(r.std_error, first.std_error));
    }

    CHECK(csv_of(run_mu_gain(c)) == csv_of(t));
    {
        ThreadEnv env("1");
        CHECK(csv_of(run_mu_gain(c)) == csv_of(t));
    }

    ExperimentConfig other = c;
    other.seed = c.seed + 1;
    CHECK(csv_of(run_mu_gain(other)) != csv_of(t));
}

TEST_CASE("femto overlay with no femtos is all macro", "[experiments]")
{
    ExperimentConfig c = default_config(Experiment::Femto);
    c.n_drops = 4;
    c.n_tti = 20;
    c.sweep_values = {0, 4};
    const ResultTable t = run_femto(c);
    CHECK(t.find(0.0, "tput.femto") == nullptr);
    CHECK(t.at(0.0, "tput.combined").mean == Catch::Approx(t.at(0.0, "tput.macro").mean).epsilon(1e-12));
    CHECK(t.at(0.0, "femto_user_share").mean == 0.0);
    CHECK(t.find(4.0, "tput.femto") != nullptr);
    CHECK(t.find(4.0, "diff.combined_vs_previous") != nullptr);
}

TEST_CASE("CFO study", "[experiments]")
{
    ExperimentConfig c = default_config(Experiment::Cfo);
    c.n_drops = 200;
    c.cfo.force_zero = true;
    const ResultTable zero = run_cfo(c);
    for (const auto& r : zero.rows()) CHECK(r.mean == 0.0);

    c.cfo.force_zero = false;
    const ResultTable t = run_cfo(c);
    for (double snr : c.sweep_values) {
        CHECK(t.at(snr, "loss.predicted").mean > 0.0);
        CHECK(t.at(snr, "loss.simulated").n == 200);
    }
}

TEST_CASE("pilot power study", "[experiments]")
{
    ExperimentConfig c = default_config(Experiment::PilotPower);
    c.pilot.gain_draws = 20;
    const ResultTable t = run_pilot_power(c);
    for (const auto& a : c.mimo.antennas) {
        const std::string tag = to_string(a);
        CHECK(t.at(0.0, "power_used_pct." + tag).mean >= 100.0 * (1.0 - 1e-5));
        for (double v : c.sweep_values) {
            CHECK(t.at(v, "power_used_pct." + tag).mean <= 100.0);
            CHECK(t.at(v, "throughput_ratio." + tag).mean >= 0.99);
        }
    }
}

TEST_CASE("DAS study runs and calibrates its floor", "[experiments]")
{
    ExperimentConfig c = default_config(Experiment::Das);
    c.n_drops = 2;
    c.n_tti = 2;
    c.sweep_values = {4};
    const ResultTable t = run_das(c);
    CHECK(t.find(0.0, "floor_dbm") != nullptr);
    CHECK(std::abs(t.at(0.0, "floor_geometry_err_db").mean) <= 1e-6);
    for (const char* mode : {"svd-perfect", "clsm-quantized", "zf-perfect", "zf-quantized", "pu2rc-quantized"})
        for (const char* layout : {"das", "centralized"})
            CHECK(t.at(4.0, std::string("ase.") + mode + "." + layout).mean > 0.0);
}

TEST_CASE("experiment dispatch validates first", "[experiments]")
{
    ExperimentConfig c = default_config(Experiment::Cfo);
    c.n_drops = 0;
    CHECK_THROWS_AS(run_experiment(c), ConfigError);
}
