#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ltesim/rng.hpp"

namespace ltesim::linkmodel {

/// Pilot/data power pair under a total budget (all in W).
struct PowerSplit {
    double p_pilot = 0.0;
    double p_data = 0.0;
    double budget = 0.0;

    double total() const { return p_pilot + p_data; }
    double pilot_fraction() const { return p_pilot / total(); }
};

/// Channel-estimation error model:
///   mse = c_noise * N0 / (pilot_density * p_pilot) + c_floor * v^2
/// The second term is the error floor of a time-variant channel.
struct EstimatorModel {
    double c_noise = 1.0;
    double c_floor = 1e-5; // (km/h)^-2
    double pilot_density = 1.0;
};

double estimation_mse(const EstimatorModel& est, const PowerSplit& split, double velocity_kmh, double noise_power);

/// p_data * g / (N0 + p_data * mse * n_streams). The second denominator term
/// is the interlayer interference caused by imperfect channel knowledge.
double post_eq_sinr(const PowerSplit& split, double channel_gain, double noise_power, double mse, int n_streams);

struct SplitSetup {
    EstimatorModel estimator;
    double velocity_kmh = 0.0;
    double noise_power = 0.01;
    double channel_gain = 1.0;
    int n_streams = 1;
};

/// SINR of `split` under `setup`, composing estimation_mse and post_eq_sinr.
double split_sinr(const SplitSetup& setup, const PowerSplit& split);

/// SINR-maximizing pilot/data split with p_pilot + p_data = budget
/// (golden-section search on the pilot fraction).
PowerSplit optimal_power_split(const SplitSetup& setup, double budget);

inline constexpr double kPowerEfficientSinrTolerance = 1e-6;

/// Smallest total power whose best split keeps the SINR within
/// kPowerEfficientSinrTolerance (relative) of the full-budget optimum.
/// Bisection on the total-power scale; never exceeds `budget`.
PowerSplit power_efficient_split(const SplitSetup& setup, double budget);

/// min(efficiency * log2(1 + sinr), cap).
struct RateMap {
    double efficiency = 0.75;
    double cap = 4.5;
};

double rate_map(double sinr, const RateMap& map = {});

/// Share of the 168 resource elements of an RB pair taken by cell-specific
/// reference signals: 8, 16 or 24 for 1, 2 or 4 transmit ports.
double reference_signal_overhead(int n_tx_ports);

/// CFO estimator accuracy, mse = c_mse / (n_obs * snr) in squared
/// subcarrier spacings.
struct CfoModel {
    double c_mse = 0.1;
    std::size_t n_obs = 64;

    /// Two accuracy presets standing in for time- and frequency-domain estimators.
    static CfoModel time_domain() { return {0.1, 64}; }
    static CfoModel frequency_domain() { return {0.1, 144}; }
};

double cfo_mse(const CfoModel& model, double snr);
double residual_cfo(const CfoModel& model, double snr);

/// Post-equalization SINR under normalized CFO eps, ICI treated as self noise:
///   snr S^2 / (1 + snr (1 - S^2)),  S = sinc(eps).
double sinr_with_cfo(double snr, double eps);

/// sum_r f(SINR_r(0)) - sum_r f(SINR_r(eps)).
double throughput_loss(std::span<const double> snr_per_re, double eps, const RateMap& map = {});

struct CfoLossPoint {
    double snr = 0.0;
    double loss = 0.0;
};

/// Deterministic chain mse -> eps -> throughput loss for `n_re` resource
/// elements at each grid SNR.
std::vector<CfoLossPoint> predict_cfo_loss_curve(const CfoModel& model, std::span<const double> snr_grid,
                                                 std::size_t n_re = 1, const RateMap& map = {});

/// Monte-Carlo loss: eps ~ N(0, mse(snr)), one draw per realization, loss
/// averaged over `draws`. Returns per-draw losses.
std::vector<double> simulate_cfo_loss(const CfoModel& model, double snr, std::size_t n_re, std::size_t draws,
                                      RngStream& rng, const RateMap& map = {});

} // namespace ltesim::linkmodel
