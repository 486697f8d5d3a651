#include <cmath>
#include <vector>

#include "catch_amalgamated.hpp"

#include "ltesim/error.hpp"
#include "ltesim/linkmodel.hpp"
#include "oracles.hpp"

using namespace ltesim;
using namespace ltesim::linkmodel;

namespace {

oracle::SplitModel as_oracle(const SplitSetup& s)
{
    oracle::SplitModel m;
    m.c_noise = s.estimator.c_noise;
    m.c_floor = s.estimator.c_floor;
    m.density = s.estimator.pilot_density;
    m.velocity = s.velocity_kmh;
    m.noise = s.noise_power;
    m.gain = s.channel_gain;
    m.streams = s.n_streams;
    return m;
}

} // namespace

TEST_CASE("estimation error and post-equalization SINR", "[linkmodel]")
{
    const EstimatorModel est{1.0, 1e-4, 1.0};
    CHECK(estimation_mse(est, {2.0, 1.0, 3.0}, 100.0, 1.0) == Catch::Approx(1.5).epsilon(1e-12));
    CHECK(estimation_mse(est, {1e12, 1.0, 1e12}, 0.0, 1.0) == Catch::Approx(0.0).margin(1e-11));
    CHECK(estimation_mse(est, {1e12, 1.0, 1e12}, 50.0, 1.0) == Catch::Approx(0.25).epsilon(1e-9));
    CHECK_THROWS_AS(estimation_mse(est, {0.0, 1.0, 1.0}, 0.0, 1.0), DegenerateSplit);

    CHECK(post_eq_sinr({1.0, 1.0, 2.0}, 1.0, 0.01, 0.09, 1) == Catch::Approx(10.0).epsilon(1e-12));
    CHECK(post_eq_sinr({1.0, 2.0, 3.0}, 1.5, 0.1, 0.0, 2) == Catch::Approx(30.0).epsilon(1e-12));
    CHECK(post_eq_sinr({1.0, 1e12, 1e12}, 1.0, 0.01, 0.2, 2) == Catch::Approx(2.5).epsilon(1e-6));
}

TEST_CASE("optimal split is SNR-invariant at zero velocity and matches a grid", "[linkmodel]")
{
    SplitSetup a;
    a.noise_power = 1e-1;
    SplitSetup b = a;
    b.noise_power = 1e-3;
    const auto sa = optimal_power_split(a, 1.0);
    const auto sb = optimal_power_split(b, 1.0);
    CHECK(std::abs(sa.pilot_fraction() - sb.pilot_fraction()) <= 1e-6);
    CHECK(sa.total() == Catch::Approx(1.0).epsilon(1e-12));

    for (double v : {0.0, 120.0, 300.0}) {
        SplitSetup s;
        s.velocity_kmh = v;
        s.n_streams = 2;
        const auto split = optimal_power_split(s, 2.0);
        const double grid = oracle::best_pilot_fraction_grid(as_oracle(s), 2.0, 1000000);
        CHECK(std::abs(split.pilot_fraction() - grid) <= 1e-5);
        CHECK(split_sinr(s, split) >= as_oracle(s).sinr(grid * 2.0, (1.0 - grid) * 2.0) * (1.0 - 1e-9));
    }

    // Nearly free estimation sends almost everything to data.
    SplitSetup cheap;
    cheap.estimator = {1e-9, 0.0, 1.0};
    CHECK(optimal_power_split(cheap, 1.0).pilot_fraction() < 1e-3);
    CHECK_THROWS_AS(optimal_power_split(cheap, 0.0), InvalidParameter);
}

TEST_CASE("power-efficient split", "[linkmodel]")
{
    SplitSetup still;
    const auto full = power_efficient_split(still, 1.0);
    CHECK(full.total() == Catch::Approx(1.0).epsilon(1e-5));

    SplitSetup fast;
    fast.velocity_kmh = 200.0;
    const auto unit = optimal_power_split(fast, 1.0);
    const auto eff = power_efficient_split(fast, 1.0);
    const double target = split_sinr(fast, unit);
    CHECK(eff.total() <= 1.0);
    CHECK(eff.total() < 1.0);
    CHECK(split_sinr(fast, eff) >= target * (1.0 - 1e-6) * (1.0 - 1e-9));

    const std::size_t n = 2000;
    const double grid = oracle::min_total_grid(as_oracle(fast), 1.0, target * (1.0 - 1e-6), n);
    CHECK(std::abs(eff.total() - grid) <= 2.0 / static_cast<double>(n));

    // Savings never shrink as the channel gets faster.
    double previous = 2.0;
    for (double v = 0.0; v <= 500.0; v += 50.0) {
        SplitSetup s;
        s.velocity_kmh = v;
        const double total = power_efficient_split(s, 1.0).total();
        CHECK(total <= previous * (1.0 + 1e-9));
        previous = total;
    }
}

TEST_CASE("rate map", "[linkmodel]")
{
    CHECK(rate_map(0.0) == 0.0);
    CHECK(rate_map(1.0, {1.0, 10.0}) == Catch::Approx(1.0));
    CHECK(rate_map(1.0) == Catch::Approx(0.75));
    CHECK(rate_map(1e6) == 4.5);
    CHECK_THROWS_AS(rate_map(-1.0), InvalidParameter);
    CHECK(reference_signal_overhead(1) == Catch::Approx(8.0 / 168.0));
    CHECK(reference_signal_overhead(4) == Catch::Approx(24.0 / 168.0));
    CHECK_THROWS_AS(reference_signal_overhead(3), InvalidParameter);
}

TEST_CASE("CFO chain", "[linkmodel]")
{
    const CfoModel m{0.1, 10};
    CHECK(cfo_mse(m, 10.0) == Catch::Approx(1e-3).epsilon(1e-12));
    CHECK(cfo_mse(m, 20.0) == Catch::Approx(cfo_mse(m, 10.0) / 2.0));
    CHECK_THROWS_AS(cfo_mse(m, 0.0), InvalidParameter);
    CHECK(residual_cfo(m, 10.0) == Catch::Approx(std::sqrt(1e-3)));

    CHECK(sinr_with_cfo(100.0, 0.0) == 100.0);
    CHECK(sinr_with_cfo(100.0, 0.05) == Catch::Approx(oracle::sinr_cfo(100.0, 0.05)).epsilon(1e-12));
    CHECK(sinr_with_cfo(100.0, 0.05) < 100.0);
    CHECK_THROWS_AS(sinr_with_cfo(10.0, 1.0), OutOfRange);

    const std::vector<double> one{100.0};
    CHECK(throughput_loss(one, 0.0) == 0.0);
    CHECK(throughput_loss(one, 0.05) ==
          Catch::Approx(oracle::rate_map(100.0) - oracle::rate_map(oracle::sinr_cfo(100.0, 0.05))).epsilon(1e-12));

    const std::vector<double> res{3.0, 10.0, 30.0};
    double prev = 0.0;
    for (double eps = 0.0; eps < 0.5; eps += 0.01) {
        const double up = throughput_loss(res, eps);
        CHECK(up >= prev);
        CHECK(throughput_loss(res, -eps) == Catch::Approx(up).margin(1e-15));
        prev = up;
    }
}

TEST_CASE("predicted CFO loss matches Monte-Carlo", "[linkmodel]")
{
    const CfoModel model = CfoModel::time_domain();
    const std::vector<double> snr{1.0, 3.0, 10.0, 30.0};
    const auto pred = predict_cfo_loss_curve(model, snr);
    // With mse ~ 1/snr the ICI-to-signal ratio a is SNR-free, so below the
    // rate cap the loss stays under eta * log2(1 + a).
    const double s = std::sin(M_PI * 1e-3) / (M_PI * 1e-3);
    const double ici_per_mse = (1.0 - s * s) / 1e-6;
    const double a = ici_per_mse * model.c_mse / static_cast<double>(model.n_obs);
    for (std::size_t i = 0; i < snr.size(); ++i) {
        CHECK(pred[i].loss >= 0.0);
        CHECK(pred[i].loss <= 0.75 * std::log2(1.0 + a) * (1.0 + 1e-3));
        RngStream rng = RngStream::derive(21, 0, StreamPurpose::Cfo, i);
        const auto sim = simulate_cfo_loss(model, snr[i], 1, 10000, rng);
        CHECK(oracle::mean(sim) == Catch::Approx(pred[i].loss).epsilon(0.05));
    }
    // Past the cap both rates clip and the loss vanishes.
    const std::vector<double> high{1e3, 1e4, 1e6};
    for (const auto& p : predict_cfo_loss_curve(model, high)) CHECK(p.loss == 0.0);
    CHECK_THROWS_AS(predict_cfo_loss_curve(model, std::vector<double>{}), InvalidParameter);
}
