#include <algorithm>
#include <cmath>
#include <limits>

#include "ltesim/error.hpp"
#include "ltesim/experiments.hpp"
#include "ltesim/linkmodel.hpp"

namespace ltesim::sim {

namespace {

double mean_of(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

} // namespace

ResultTable run_cfo(const ExperimentConfig& config)
{
    config.validate();
    linkmodel::CfoModel model =
        config.cfo.preset == "frequency" ? linkmodel::CfoModel::frequency_domain() : linkmodel::CfoModel::time_domain();
    model.c_mse = config.cfo.c_mse;
    if (config.cfo.n_obs > 0) model.n_obs = config.cfo.n_obs;
    const linkmodel::RateMap map;
    const std::size_t n_re = config.cfo.n_re;

    std::vector<double> snr;
    for (double db : config.sweep_values) snr.push_back(propagation::db_to_linear(db));

    // One residual-offset draw per drop and grid point.
    const auto drops = run_drops(config.n_drops, [&](std::size_t d) {
        std::vector<double> loss(snr.size());
        for (std::size_t i = 0; i < snr.size(); ++i) {
            const std::vector<double> res(n_re, snr[i]);
            if (config.cfo.force_zero) {
                loss[i] = linkmodel::throughput_loss(res, 0.0, map);
            } else {
                RngStream rng = RngStream::derive(config.seed, d, StreamPurpose::Cfo, i);
                loss[i] = linkmodel::simulate_cfo_loss(model, snr[i], n_re, 1, rng, map).front();
            }
        }
        return loss;
    });

    ResultTable table(to_string(config.experiment), config.sweep_variable);
    const auto predicted = linkmodel::predict_cfo_loss_curve(model, snr, n_re, map);
    for (std::size_t i = 0; i < snr.size(); ++i) {
        const double x = config.sweep_values[i];
        const std::vector<double> res(n_re, snr[i]);
        const double pred = config.cfo.force_zero ? linkmodel::throughput_loss(res, 0.0, map) : predicted[i].loss;
        std::vector<double> sim;
        for (const auto& d : drops) sim.push_back(d[i]);
        table.add({x, "loss.predicted", pred, 0.0, 1});
        table.add(x, "loss.simulated", sim);
        table.add({x, "residual_cfo", config.cfo.force_zero ? 0.0 : linkmodel::residual_cfo(model, snr[i]), 0.0, 1});
    }
    return table;
}

ResultTable run_pilot_power(const ExperimentConfig& config)
{
    config.validate();
    const PilotParams& pp = config.pilot;
    const double noise = pp.budget / propagation::db_to_linear(pp.snr_db);
    const linkmodel::RateMap map;

    ResultTable table(to_string(config.experiment), config.sweep_variable);
    for (std::size_t a = 0; a < config.mimo.antennas.size(); ++a) {
        const AntennaConfig ant = config.mimo.antennas[a];
        const int n_streams = std::min(ant.n_tx, ant.n_rx);

        // Exp(1) stream gains, common to every velocity and both allocations.
        RngStream rng = RngStream::derive(config.seed, 0, StreamPurpose::Channel, a);
        std::exponential_distribution<double> expo(1.0);
        std::vector<std::vector<double>> gains(pp.gain_draws, std::vector<double>(static_cast<std::size_t>(n_streams)));
        for (auto& draw : gains)
            for (double& g : draw) g = expo(rng.engine());

        for (double v : config.sweep_values) {
            linkmodel::SplitSetup setup;
            setup.estimator = {pp.c_noise, pp.c_floor, pp.density_base * ant.n_tx};
            setup.velocity_kmh = v;
            setup.noise_power = noise;
            setup.n_streams = n_streams;

            const linkmodel::PowerSplit unit = linkmodel::optimal_power_split(setup, pp.budget);
            const linkmodel::PowerSplit efficient = linkmodel::power_efficient_split(setup, pp.budget);

            const auto throughput = [&](const linkmodel::PowerSplit& split) {
                std::vector<double> out;
                out.reserve(gains.size());
                for (const auto& draw : gains) {
                    double rate = 0.0;
                    for (double g : draw) {
                        linkmodel::SplitSetup s = setup;
                        s.channel_gain = g;
                        rate += linkmodel::rate_map(linkmodel::split_sinr(s, split), map);
                    }
                    out.push_back(rate);
                }
                return out;
            };
            const auto t_unit = throughput(unit);
            const auto t_eff = throughput(efficient);

            const std::string tag = to_string(ant);
            table.add(v, "throughput_unit." + tag, t_unit);
            table.add(v, "throughput_efficient." + tag, t_eff);
            table.add({v, "throughput_ratio." + tag, mean_of(t_eff) / mean_of(t_unit), 0.0, 1});
            table.add({v, "power_used_pct." + tag, 100.0 * efficient.total() / pp.budget, 0.0, 1});
            table.add({v, "pilot_fraction_unit." + tag, unit.pilot_fraction(), 0.0, 1});
            table.add({v, "pilot_fraction_efficient." + tag, efficient.pilot_fraction(), 0.0, 1});
        }
    }
    return table;
}

} // namespace ltesim::sim
