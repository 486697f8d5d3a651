#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "ltesim/error.hpp"
#include "ltesim/experiments.hpp"
#include "ltesim/metrics.hpp"
#include "ltesim/scheduling.hpp"

namespace ltesim::sim {

namespace {

using scheduling::SchedulerKind;

struct MuDrop {
    // [antenna config][k index][scheduler] -> per-user throughput, bits/s
    std::vector<std::vector<std::vector<std::vector<double>>>> throughput;
};

std::vector<double> wideband_sinr(const ExperimentConfig& config, const geometry::NetworkLayout& layout,
                                  const geometry::UserDrop& drop, std::size_t d)
{
    const auto prop = propagation_config(config);
    RngStream shadow = RngStream::derive(config.seed, d, StreamPurpose::Shadowing);
    const propagation::LinkTable links(layout, drop, prop, shadow);
    const geometry::ServerPowerMatrix power = links.server_power();
    std::vector<double> sinr(drop.users.size());
    for (Eigen::Index u = 0; u < power.rows(); ++u) {
        const double interference = power.row(u).sum() - power(u, 0);
        sinr[static_cast<std::size_t>(u)] = power(u, 0) / (prop.noise_power_w + interference);
    }
    return sinr;
}

MuDrop simulate_drop(const ExperimentConfig& config, const geometry::NetworkLayout& layout,
                     const std::vector<mimo::PrecoderCodebook>& codebooks, const std::vector<std::size_t>& ks,
                     std::size_t d)
{
    const std::size_t k_max = ks.back();
    RngStream geo = RngStream::derive(config.seed, d, StreamPurpose::Geometry);
    geometry::UserOptions uopt;
    uopt.velocity_kmh = config.propagation.velocity_kmh;
    const geometry::UserDrop drop = geometry::drop_users_uniform(layout, k_max, geo, uopt);
    const std::vector<double> sinr = wideband_sinr(config, layout, drop, d);
    const double rho = propagation::doppler_correlation(config.propagation.velocity_kmh, config.propagation.carrier_hz,
                                                        config.propagation.tti_s);
    const double bw = config.rb_bandwidth_hz;
    const std::size_t n_sched = config.scheduler.kinds.size();

    MuDrop out;
    for (std::size_t a = 0; a < config.mimo.antennas.size(); ++a) {
        const AntennaConfig ant = config.mimo.antennas[a];
        std::vector<propagation::FadingTrace> traces;
        traces.reserve(k_max);
        for (std::size_t u = 0; u < k_max; ++u) {
            RngStream fr = RngStream::derive(config.seed, d, StreamPurpose::Fading, u * 64 + a);
            traces.push_back(propagation::generate_fading(config.n_tti, config.n_rb, static_cast<std::size_t>(ant.n_rx),
                                                          static_cast<std::size_t>(ant.n_tx), rho, fr,
                                                          config.propagation.rx_correlation));
        }
        std::vector<scheduling::UserLinkBudget> budgets;
        for (std::size_t u = 0; u < k_max; ++u) budgets.push_back({sinr[u], &traces[u]});

        scheduling::RateContext ctx;
        if (ant.n_tx == 1 && ant.n_rx == 1) {
            ctx.mode = scheduling::RateMode::Siso;
        } else {
            ctx.mode = scheduling::RateMode::Clsm;
            ctx.codebook = &codebooks[a];
        }

        // One scheduler state per (k, scheduler); users are nested prefixes.
        std::vector<std::vector<scheduling::SchedulerState>> states(ks.size(),
                                                                    std::vector<scheduling::SchedulerState>(n_sched));
        std::vector<std::vector<std::vector<double>>> served(
            ks.size(), std::vector<std::vector<double>>(n_sched));
        for (std::size_t ki = 0; ki < ks.size(); ++ki)
            for (std::size_t s = 0; s < n_sched; ++s) served[ki][s].assign(ks[ki], 0.0);

        const double data_share =
            config.mimo.rs_overhead ? 1.0 - linkmodel::reference_signal_overhead(ant.n_tx) : 1.0;
        for (std::size_t t = 0; t < config.n_tti; ++t) {
            const scheduling::RateMatrix rates = data_share * scheduling::estimate_rates(budgets, t, ctx);
            if (t == 0) {
                for (std::size_t ki = 0; ki < ks.size(); ++ki) {
                    const std::size_t k = ks[ki];
                    std::vector<double> init(k);
                    for (std::size_t u = 0; u < k; ++u)
                        init[u] = rates.row(static_cast<Eigen::Index>(u)).mean() * static_cast<double>(config.n_rb) * bw /
                                  static_cast<double>(k);
                    for (std::size_t s = 0; s < n_sched; ++s)
                        states[ki][s] = scheduling::SchedulerState::with_averages(init, config.scheduler.window_tti);
                }
            }
            for (std::size_t ki = 0; ki < ks.size(); ++ki) {
                const scheduling::RateMatrix sub = rates.topRows(static_cast<Eigen::Index>(ks[ki]));
                for (std::size_t s = 0; s < n_sched; ++s) {
                    const auto assignment = scheduling::schedule(config.scheduler.kinds[s], sub, states[ki][s], bw);
                    const auto tput = scheduling::served_throughput(sub, assignment, bw);
                    for (std::size_t u = 0; u < tput.size(); ++u) served[ki][s][u] += tput[u];
                }
            }
        }
        for (auto& per_k : served)
            for (auto& per_s : per_k)
                for (double& v : per_s) v /= static_cast<double>(config.n_tti);
        out.throughput.push_back(std::move(served));
    }
    return out;
}

} // namespace

ResultTable run_mu_gain(const ExperimentConfig& config)
{
    config.validate();
    std::vector<std::size_t> ks;
    for (double v : config.sweep_values) ks.push_back(static_cast<std::size_t>(v));

    geometry::HexGridOptions hex;
    hex.rru_fraction = config.layout.rru_fraction;
    hex.cell_power_w = propagation::dbm_to_watt(config.layout.cell_power_dbm);
    const geometry::NetworkLayout layout = geometry::build_hex_grid(config.layout.rings, config.layout.isd_m, hex);

    std::vector<mimo::PrecoderCodebook> codebooks;
    for (const auto& ant : config.mimo.antennas) {
        RngStream cb = RngStream::derive(config.seed, std::numeric_limits<std::uint64_t>::max(), StreamPurpose::Codebook,
                                         static_cast<std::uint64_t>(ant.n_tx));
        const auto max_rank = static_cast<std::size_t>(std::min(ant.n_tx, ant.n_rx));
        codebooks.push_back(mimo::PrecoderCodebook::random(static_cast<std::size_t>(ant.n_tx), max_rank,
                                                           config.mimo.clsm_bits, cb));
    }

    const auto drops = run_drops(config.n_drops, [&](std::size_t d) {
        return simulate_drop(config, layout, codebooks, ks, d);
    });

    ResultTable table(to_string(config.experiment), config.sweep_variable);
    const std::size_t n_sched = config.scheduler.kinds.size();
    // mean sum throughput per [antenna][scheduler] over k, for the fits
    std::vector<std::vector<std::vector<metrics::GainPoint>>> points(
        config.mimo.antennas.size(), std::vector<std::vector<metrics::GainPoint>>(n_sched));

    for (std::size_t a = 0; a < config.mimo.antennas.size(); ++a) {
        const std::string ant = to_string(config.mimo.antennas[a]);
        for (std::size_t ki = 0; ki < ks.size(); ++ki) {
            for (std::size_t s = 0; s < n_sched; ++s) {
                const std::string tag = to_string(config.scheduler.kinds[s]) + "." + ant;
                std::vector<double> sums;
                std::vector<double> jain;
                for (const auto& drop : drops) {
                    const auto& users = drop.throughput[a][ki][s];
                    double sum = 0.0;
                    for (double v : users) sum += v;
                    sums.push_back(sum);
                    jain.push_back(sum > 0.0 ? metrics::jain_index(users) : std::numeric_limits<double>::quiet_NaN());
                }
                const double k = static_cast<double>(ks[ki]);
                table.add(k, "sum_tput." + tag, sums);
                table.add(k, "jain." + tag, jain);
                points[a][s].push_back({k, table.at(k, "sum_tput." + tag).mean});
            }
        }
    }

    // Gain fits, reported at sweep value 0.
    std::vector<std::size_t> fit_points;
    for (std::size_t ki = 0; ki < ks.size(); ++ki)
        if (ks[ki] >= 2) fit_points.push_back(ki);
    if (fit_points.size() >= 3) {
        std::map<std::pair<std::size_t, std::size_t>, metrics::GainFit> fits;
        for (std::size_t a = 0; a < config.mimo.antennas.size(); ++a)
            for (std::size_t s = 0; s < n_sched; ++s) {
                if (config.scheduler.kinds[s] == SchedulerKind::RoundRobin) continue;
                std::vector<metrics::GainPoint> pts;
                for (std::size_t ki : fit_points) pts.push_back(points[a][s][ki]);
                const metrics::GainFit fit = metrics::fit_loglog_gain(pts);
                fits[{a, s}] = fit;
                const std::string tag = to_string(config.scheduler.kinds[s]) + "." + to_string(config.mimo.antennas[a]);
                table.add({0.0, "fit_m." + tag, fit.m, 0.0, 1});
                table.add({0.0, "fit_b." + tag, fit.b, 0.0, 1});
                table.add({0.0, "fit_r2." + tag, fit.r_squared, 0.0, 1});
            }
        const auto siso = std::find(config.mimo.antennas.begin(), config.mimo.antennas.end(), AntennaConfig{1, 1});
        if (siso != config.mimo.antennas.end()) {
            const auto a0 = static_cast<std::size_t>(siso - config.mimo.antennas.begin());
            for (const auto& [key, fit] : fits) {
                if (key.first == a0) continue;
                const double ratio = fit.m / fits.at({a0, key.second}).m;
                const std::string tag =
                    to_string(config.scheduler.kinds[key.second]) + "." + to_string(config.mimo.antennas[key.first]);
                table.add({0.0, "gain_ratio." + tag, ratio, 0.0, 1});
            }
        }
    }
    return table;
}

} // namespace ltesim::sim
