#include "ltesim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "ltesim/error.hpp"

namespace ltesim::sim {

std::size_t worker_count()
{
    if (const char* env = std::getenv("SIM_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

propagation::PropagationConfig propagation_config(const ExperimentConfig& config)
{
    propagation::PropagationConfig p;
    p.noise_power_w = propagation::dbm_to_watt(config.propagation.noise_dbm);
    p.shadowing_enabled = config.propagation.shadowing;
    p.shadowing.macro_sigma_db = config.propagation.macro_sigma_db;
    p.shadowing.femto_sigma_db = config.propagation.femto_sigma_db;
    p.pathloss.wall_loss_db = config.propagation.wall_loss_db;
    return p;
}

ResultTable run_experiment(const ExperimentConfig& config)
{
    config.validate();
    switch (config.experiment) {
    case Experiment::MuGain: return run_mu_gain(config);
    case Experiment::Das: return run_das(config);
    case Experiment::Femto: return run_femto(config);
    case Experiment::Cfo: return run_cfo(config);
    case Experiment::PilotPower: return run_pilot_power(config);
    }
    throw ConfigError("unknown experiment");
}

namespace {

// Mean received power from every transmission point of the given cells, no shadowing.
double mean_power(const geometry::NetworkLayout& layout, const geometry::User& user, std::size_t first_cell,
                  std::size_t last_cell, const propagation::PropagationConfig& prop)
{
    double sum = 0.0;
    for (std::size_t c = first_cell; c < last_cell; ++c)
        for (const auto& tp : layout.cells[c].tx_points) sum += propagation::evaluate_link(user, tp, prop).rx_power_w();
    return sum;
}

} // namespace

FloorCalibration calibrate_interference_floor(double isd_m, int rings, const geometry::HexGridOptions& options,
                                              const propagation::PropagationConfig& prop)
{
    if (rings < 1) throw InvalidParameter("calibration needs at least one ring of interferers");
    const geometry::NetworkLayout grid = geometry::build_hex_grid(rings, isd_m, options);

    // Edge points of cell 0: its whole footprint boundary, skipping the site
    // vertex, pulled slightly inside so they belong to cell 0.
    const auto& v = grid.cells[0].footprint.vertices();
    std::vector<geometry::Point> points;
    constexpr int kPerEdge = 16;
    for (std::size_t e = 0; e < v.size(); ++e) {
        const geometry::Point a = v[e];
        const geometry::Point b = v[(e + 1) % v.size()];
        for (int i = 0; i < kPerEdge; ++i) {
            const geometry::Point p = a + (static_cast<double>(i) / kPerEdge) * (b - a);
            if (geometry::distance(p, v[0]) < 1e-9) continue;
            points.push_back(0.98 * (p - v[0]) + v[0]);
        }
    }

    std::vector<double> outer;
    std::vector<double> site;
    std::vector<double> signal;
    for (const auto& p : points) {
        geometry::User u;
        u.position = p;
        signal.push_back(mean_power(grid, u, 0, 1, prop));
        site.push_back(mean_power(grid, u, 1, 3, prop));
        outer.push_back(mean_power(grid, u, 3, grid.cells.size(), prop));
    }

    const auto geometry_db = [&](std::size_t i, double other) {
        return 10.0 * std::log10(signal[i] / (prop.noise_power_w + site[i] + other));
    };
    double target = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) target += geometry_db(i, outer[i]);
    target /= static_cast<double>(points.size());
    const auto mean_geometry_db = [&](double floor_w) {
        double sum = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) sum += geometry_db(i, floor_w);
        return sum / static_cast<double>(points.size());
    };

    // Mean edge geometry is decreasing in the floor; bisect on log(floor)
    // between bounds that bracket the target.
    double lo = std::log(*std::min_element(outer.begin(), outer.end())) - 10.0;
    double hi = std::log(*std::max_element(outer.begin(), outer.end())) + 10.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mean_geometry_db(std::exp(mid)) > target)
            lo = mid;
        else
            hi = mid;
    }

    FloorCalibration cal;
    cal.n_points = points.size();
    cal.floor_w = std::exp(0.5 * (lo + hi));
    cal.geometry_error_db = mean_geometry_db(cal.floor_w) - target;
    double err_sum = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double err = std::abs(geometry_db(i, cal.floor_w) - geometry_db(i, outer[i]));
        err_sum += err;
        cal.max_abs_error_db = std::max(cal.max_abs_error_db, err);
    }
    cal.mean_abs_error_db = err_sum / static_cast<double>(points.size());
    return cal;
}

} // namespace ltesim::sim
