#include <cmath>
#include <limits>
#include <memory>

#include "ltesim/error.hpp"
#include "ltesim/experiments.hpp"
#include "ltesim/metrics.hpp"
#include "ltesim/scheduling.hpp"

namespace ltesim::sim {

namespace {

struct FemtoPoint {
    std::vector<metrics::UserThroughput> users;
};

using FemtoDrop = std::vector<FemtoPoint>; // per sweep point

FemtoDrop simulate_drop(const ExperimentConfig& config, const geometry::NetworkLayout& macro,
                        const std::vector<std::size_t>& counts, std::size_t d)
{
    const auto prop = propagation_config(config);
    const FemtoParams& fp = config.femto;

    RngStream geo = RngStream::derive(config.seed, d, StreamPurpose::Geometry);
    geometry::UserOptions uopt;
    uopt.velocity_kmh = config.propagation.velocity_kmh;
    const geometry::UserDrop drop =
        geometry::drop_user_clusters(macro.region, fp.n_clusters, fp.users_per_cluster, fp.cluster_radius_m, geo, uopt);

    geometry::FemtoOptions fopt;
    fopt.tx_power_w = propagation::dbm_to_watt(config.propagation.femto_power_dbm);
    const geometry::NetworkLayout full =
        geometry::place_femtos_at_centers(macro, drop.cluster_centers, fp.n_clusters, fopt);

    // Links against every potential femto; inactive ones are masked below.
    RngStream shadow = RngStream::derive(config.seed, d, StreamPurpose::Shadowing);
    const propagation::LinkTable links(full, drop, prop, shadow);
    const geometry::ServerPowerMatrix power = links.server_power();
    const std::size_t n_cells = full.cells.size();
    const std::size_t n_users = drop.users.size();

    const double rho = propagation::doppler_correlation(config.propagation.velocity_kmh, config.propagation.carrier_hz,
                                                        config.propagation.tti_s);
    std::vector<propagation::FadingTrace> traces;
    traces.reserve(n_users);
    for (std::size_t u = 0; u < n_users; ++u) {
        RngStream fr = RngStream::derive(config.seed, d, StreamPurpose::Fading, u);
        traces.push_back(propagation::generate_fading(config.n_tti, config.n_rb, 1, 1, rho, fr));
    }

    FemtoDrop out;
    for (std::size_t n_femto : counts) {
        // Target macro cell plus the first n_femto femtos may serve; outer
        // macro cells and active femtos interfere.
        const std::size_t n_servers = geometry::server_count(full);
        const auto eligible_store = std::make_unique<bool[]>(n_servers);
        eligible_store[0] = true;
        for (std::size_t f = 0; f < n_femto; ++f) eligible_store[n_cells + f] = true;
        std::vector<bool> active(geometry::server_count(full), false);
        for (std::size_t c = 0; c < n_cells; ++c) active[c] = true;
        for (std::size_t f = 0; f < n_femto; ++f) active[n_cells + f] = true;

        const std::span<const bool> eligible(eligible_store.get(), n_servers);
        const geometry::UserDrop attached = geometry::attach_users(full, drop, power, eligible);

        std::vector<std::size_t> server(n_users);
        std::vector<double> sinr(n_users);
        for (std::size_t u = 0; u < n_users; ++u) {
            const auto& att = *attached.users[u].attachment;
            const std::size_t s =
                att.tier == geometry::Tier::Macro ? static_cast<std::size_t>(att.id) : n_cells + static_cast<std::size_t>(att.id);
            server[u] = s;
            double interference = 0.0;
            for (std::size_t o = 0; o < active.size(); ++o)
                if (active[o] && o != s) interference += power(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(o));
            sinr[u] = power(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(s)) / (prop.noise_power_w + interference);
        }

        std::vector<double> tput(n_users, 0.0);
        scheduling::RateContext ctx;
        for (std::size_t s = 0; s < active.size(); ++s) {
            std::vector<std::size_t> members;
            for (std::size_t u = 0; u < n_users; ++u)
                if (server[u] == s) members.push_back(u);
            if (members.empty()) continue;

            std::vector<scheduling::UserLinkBudget> budgets;
            for (std::size_t u : members) budgets.push_back({sinr[u], &traces[u]});
            const double bw = config.rb_bandwidth_hz;
            const auto kind = config.scheduler.kinds.front();
            scheduling::SchedulerState state;
            std::vector<double> served(members.size(), 0.0);
            for (std::size_t t = 0; t < config.n_tti; ++t) {
                const auto rates = scheduling::estimate_rates(budgets, t, ctx);
                if (t == 0) {
                    std::vector<double> init(members.size());
                    for (std::size_t i = 0; i < members.size(); ++i)
                        init[i] = rates.row(static_cast<Eigen::Index>(i)).mean() * static_cast<double>(config.n_rb) * bw /
                                  static_cast<double>(members.size());
                    state = scheduling::SchedulerState::with_averages(init, config.scheduler.window_tti);
                }
                const auto assignment = scheduling::schedule(kind, rates, state, bw);
                const auto delivered = scheduling::served_throughput(rates, assignment, bw);
                for (std::size_t i = 0; i < members.size(); ++i) served[i] += delivered[i];
            }
            for (std::size_t i = 0; i < members.size(); ++i)
                tput[members[i]] = served[i] / static_cast<double>(config.n_tti);
        }

        FemtoPoint point;
        for (std::size_t u = 0; u < n_users; ++u)
            point.users.push_back({drop.users[u].id, tput[u],
                                   server[u] < n_cells ? geometry::Tier::Macro : geometry::Tier::Femto});
        out.push_back(std::move(point));
    }
    return out;
}

} // namespace

ResultTable run_femto(const ExperimentConfig& config)
{
    config.validate();
    std::vector<std::size_t> counts;
    for (double v : config.sweep_values) counts.push_back(static_cast<std::size_t>(v));

    geometry::HexGridOptions hex;
    hex.cell_power_w = propagation::dbm_to_watt(config.layout.cell_power_dbm);
    const geometry::NetworkLayout macro = geometry::build_hex_grid(config.layout.rings, config.layout.isd_m, hex);

    const auto drops = run_drops(config.n_drops, [&](std::size_t d) { return simulate_drop(config, macro, counts, d); });

    ResultTable table(to_string(config.experiment), config.sweep_variable);
    std::vector<double> previous;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        std::vector<double> macro_mean;
        std::vector<double> femto_mean;
        std::vector<double> combined;
        std::vector<double> jain;
        std::vector<double> femto_share;
        for (const auto& drop : drops) {
            const metrics::ThroughputReport report(drop[i].users);
            const metrics::TierSplit split = metrics::tier_split_report(report);
            if (split.macro) macro_mean.push_back(*split.macro);
            if (split.femto) femto_mean.push_back(*split.femto);
            combined.push_back(split.combined);
            const auto values = report.throughputs();
            jain.push_back(report.cell_sum() > 0.0 ? metrics::jain_index(values) : std::numeric_limits<double>::quiet_NaN());
            femto_share.push_back(static_cast<double>(split.n_femto) / static_cast<double>(report.users().size()));
        }
        const double x = static_cast<double>(counts[i]);
        if (!macro_mean.empty()) table.add(x, "tput.macro", macro_mean);
        if (!femto_mean.empty()) table.add(x, "tput.femto", femto_mean);
        table.add(x, "tput.combined", combined);
        table.add(x, "jain", jain);
        table.add(x, "femto_user_share", femto_share);
        if (!previous.empty()) {
            // Paired change of the combined mean against the previous grid point.
            std::vector<double> step(combined.size());
            for (std::size_t d = 0; d < combined.size(); ++d) step[d] = combined[d] - previous[d];
            table.add(x, "diff.combined_vs_previous", step);
        }
        previous = combined;
    }
    return table;
}

} // namespace ltesim::sim
