#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ltesim/linkmodel.hpp"
#include "ltesim/mimo.hpp"
#include "ltesim/propagation.hpp"

namespace ltesim::scheduling {

/// Estimated rate in bits/s/Hz, users x resource blocks.
using RateMatrix = Eigen::MatrixXd;

/// Served user index per resource block.
using Assignment = std::vector<std::size_t>;

struct ResourceGrid {
    std::size_t n_tti = 1;
    std::size_t n_rb = 1;
    double bandwidth_per_rb_hz = 180e3;

    void validate() const;
};

struct SchedulerState {
    /// Exponentially weighted served throughput per user, bits/s.
    std::vector<double> average;
    std::size_t cursor = 0;
    double window_tti = 100.0;
    double floor = 1e-9;

    static SchedulerState with_averages(std::vector<double> averages, double window_tti = 100.0);
};

enum class SchedulerKind { RoundRobin, BestCqi, ProportionalFair };

/// Cyclic assignment starting at the cursor; the cursor advances by n_rb.
Assignment schedule_round_robin(SchedulerState& state, std::size_t n_users, std::size_t n_rb);

/// Per RB the user with the largest estimated rate; ties to the lowest id.
Assignment schedule_best_cqi(const RateMatrix& rates);

/// Per RB the largest rate / average ratio; averages are updated with the
/// TTI's served throughput (non-served users decay towards zero).
Assignment schedule_proportional_fair(const RateMatrix& rates, SchedulerState& state, double bandwidth_per_rb_hz);

/// Bits/s delivered to every user in one TTI.
std::vector<double> served_throughput(const RateMatrix& rates, const Assignment& assignment, double bandwidth_per_rb_hz);

/// Dispatch on `kind`. For PF and round robin `state` must be sized to the user count.
Assignment schedule(SchedulerKind kind, const RateMatrix& rates, SchedulerState& state, double bandwidth_per_rb_hz);

enum class RateMode { Siso, Clsm };

struct UserLinkBudget {
    /// Wideband signal / (noise + out-of-cell interference), linear.
    double sinr = 0.0;
    const propagation::FadingTrace* fading = nullptr;
};

struct RateContext {
    RateMode mode = RateMode::Siso;
    const mimo::PrecoderCodebook* codebook = nullptr;
    linkmodel::RateMap map;
    /// Channel-estimation error variance added to the normalized noise when set.
    std::optional<double> estimation_mse;
};

/// Per-user, per-RB rate estimates for one TTI: fading gain times the
/// wideband SINR through post-equalization SINR and the rate map.
RateMatrix estimate_rates(std::span<const UserLinkBudget> links, std::size_t tti, const RateContext& context);

} // namespace ltesim::scheduling
