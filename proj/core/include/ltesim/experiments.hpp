#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

#include "ltesim/config.hpp"
#include "ltesim/geometry.hpp"
#include "ltesim/propagation.hpp"
#include "ltesim/results.hpp"

namespace ltesim::sim {

/// Worker count: SIM_THREADS when set and positive, else the hardware count.
std::size_t worker_count();

/// Evaluates fn(drop) for every drop on up to worker_count() threads and
/// returns the results indexed by drop. Output never depends on the thread
/// count; the first failing drop (by index) rethrows.
template <typename Fn>
auto run_drops(std::size_t n_drops, Fn fn) -> std::vector<decltype(fn(std::size_t{}))>
{
    using Result = decltype(fn(std::size_t{}));
    std::vector<Result> results(n_drops);
    std::vector<std::exception_ptr> errors(n_drops);
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t d = next++; d < n_drops; d = next++) {
            try {
                results[d] = fn(d);
            } catch (...) {
                errors[d] = std::current_exception();
            }
        }
    };
    const std::size_t n_workers = std::min(worker_count(), n_drops);
    if (n_workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

ResultTable run_mu_gain(const ExperimentConfig& config);
ResultTable run_das(const ExperimentConfig& config);
ResultTable run_femto(const ExperimentConfig& config);
ResultTable run_cfo(const ExperimentConfig& config);
ResultTable run_pilot_power(const ExperimentConfig& config);

/// Dispatch on config.experiment.
ResultTable run_experiment(const ExperimentConfig& config);

struct FloorCalibration {
    double floor_w = 0.0;
    double geometry_error_db = 0.0; // mean edge geometry, model minus full grid
    double mean_abs_error_db = 0.0;
    double max_abs_error_db = 0.0;
    std::size_t n_points = 0;
};

/// Fixed out-of-site interference power for the three-cell model, chosen so
/// the mean geometry (dB) over the boundary of cell 0 equals that of the full
/// `rings` grid. Mean interference, no shadowing. The abs errors are per
/// boundary point.
FloorCalibration calibrate_interference_floor(double isd_m, int rings, const geometry::HexGridOptions& options,
                                              const propagation::PropagationConfig& prop);

/// Propagation settings derived from the config.
propagation::PropagationConfig propagation_config(const ExperimentConfig& config);

} // namespace ltesim::sim
