#include "ltesim/linkmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ltesim/error.hpp"

namespace ltesim::linkmodel {

double estimation_mse(const EstimatorModel& est, const PowerSplit& split, double velocity_kmh, double noise_power)
{
    if (!(split.p_pilot > 0.0)) throw DegenerateSplit("pilot power must be positive");
    return est.c_noise * noise_power / (est.pilot_density * split.p_pilot) + est.c_floor * velocity_kmh * velocity_kmh;
}

double post_eq_sinr(const PowerSplit& split, double channel_gain, double noise_power, double mse, int n_streams)
{
    return split.p_data * channel_gain / (noise_power + split.p_data * mse * n_streams);
}

double split_sinr(const SplitSetup& setup, const PowerSplit& split)
{
    const double mse = estimation_mse(setup.estimator, split, setup.velocity_kmh, setup.noise_power);
    return post_eq_sinr(split, setup.channel_gain, setup.noise_power, mse, setup.n_streams);
}

namespace {

constexpr double kGolden = 0.61803398874989484820;

// Iterations for the golden-section interval to shrink below `tol`.
int golden_iterations(double tol)
{
    return static_cast<int>(std::ceil(std::log(tol) / std::log(kGolden)));
}

PowerSplit split_at(double fraction, double total, double budget)
{
    return {fraction * total, (1.0 - fraction) * total, budget};
}

// Best split for a fixed total power; maximizes SINR over the pilot fraction.
PowerSplit best_split_for_total(const SplitSetup& setup, double total, double budget)
{
    auto sinr = [&](double fraction) { return split_sinr(setup, split_at(fraction, total, budget)); };

    double lo = 0.0;
    double hi = 1.0;
    double x1 = hi - kGolden * (hi - lo);
    double x2 = lo + kGolden * (hi - lo);
    double f1 = sinr(x1);
    double f2 = sinr(x2);
    const int iterations = golden_iterations(1e-9);
    for (int i = 0; i < iterations; ++i) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kGolden * (hi - lo);
            f2 = sinr(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kGolden * (hi - lo);
            f1 = sinr(x1);
        }
    }
    return split_at(0.5 * (lo + hi), total, budget);
}

} // namespace

PowerSplit optimal_power_split(const SplitSetup& setup, double budget)
{
    if (!(budget > 0.0)) throw InvalidParameter("power budget must be positive");
    return best_split_for_total(setup, budget, budget);
}

PowerSplit power_efficient_split(const SplitSetup& setup, double budget)
{
    const PowerSplit full = optimal_power_split(setup, budget);
    const double target = split_sinr(setup, full) * (1.0 - kPowerEfficientSinrTolerance);

    // Invariant: scale `hi` is feasible, scale `lo` is not (or is zero).
    double lo = 0.0;
    double hi = 1.0;
    PowerSplit best = full;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        const PowerSplit candidate = best_split_for_total(setup, mid * budget, budget);
        if (split_sinr(setup, candidate) >= target) {
            hi = mid;
            best = candidate;
        } else {
            lo = mid;
        }
    }
    return best;
}

double rate_map(double sinr, const RateMap& map)
{
    if (sinr < 0.0 || std::isnan(sinr)) throw InvalidParameter("SINR must be non-negative");
    return std::min(map.efficiency * std::log2(1.0 + sinr), map.cap);
}

double reference_signal_overhead(int n_tx_ports)
{
    constexpr double kResPerRbPair = 168.0;
    switch (n_tx_ports) {
    case 1: return 8.0 / kResPerRbPair;
    case 2: return 16.0 / kResPerRbPair;
    case 4: return 24.0 / kResPerRbPair;
    default: throw InvalidParameter("reference signal overhead defined for 1, 2 or 4 ports");
    }
}

double cfo_mse(const CfoModel& model, double snr)
{
    if (!(snr > 0.0)) throw InvalidParameter("SNR must be positive");
    return model.c_mse / (static_cast<double>(model.n_obs) * snr);
}

double residual_cfo(const CfoModel& model, double snr)
{
    return std::sqrt(cfo_mse(model, snr));
}

double sinr_with_cfo(double snr, double eps)
{
    if (!(std::abs(eps) < 1.0)) throw OutOfRange("normalized CFO must satisfy |eps| < 1");
    if (eps == 0.0) return snr;
    const double x = std::numbers::pi * eps;
    const double s = std::sin(x) / x;
    const double s2 = s * s;
    return snr * s2 / (1.0 + snr * (1.0 - s2));
}

double throughput_loss(std::span<const double> snr_per_re, double eps, const RateMap& map)
{
    double reference = 0.0;
    double impaired = 0.0;
    for (double snr : snr_per_re) {
        if (!(snr > 0.0)) throw InvalidParameter("SNR must be positive");
        reference += rate_map(sinr_with_cfo(snr, 0.0), map);
        impaired += rate_map(sinr_with_cfo(snr, eps), map);
    }
    return reference - impaired;
}

std::vector<CfoLossPoint> predict_cfo_loss_curve(const CfoModel& model, std::span<const double> snr_grid,
                                                 std::size_t n_re, const RateMap& map)
{
    if (snr_grid.empty()) throw InvalidParameter("SNR grid must be non-empty");
    std::vector<CfoLossPoint> curve;
    curve.reserve(snr_grid.size());
    for (double snr : snr_grid) {
        const double eps = residual_cfo(model, snr);
        const std::vector<double> res(n_re, snr);
        curve.push_back({snr, throughput_loss(res, eps, map)});
    }
    return curve;
}

std::vector<double> simulate_cfo_loss(const CfoModel& model, double snr, std::size_t n_re, std::size_t draws,
                                      RngStream& rng, const RateMap& map)
{
    const double sigma = residual_cfo(model, snr);
    const std::vector<double> res(n_re, snr);
    std::vector<double> losses;
    losses.reserve(draws);
    for (std::size_t i = 0; i < draws; ++i) losses.push_back(throughput_loss(res, rng.normal(0.0, sigma), map));
    return losses;
}

} // namespace ltesim::linkmodel
