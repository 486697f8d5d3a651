#include "ltesim/scheduling.hpp"

#include <algorithm>

#include "ltesim/error.hpp"

namespace ltesim::scheduling {

void ResourceGrid::validate() const
{
    if (n_tti == 0 || n_rb == 0 || !(bandwidth_per_rb_hz > 0.0))
        throw InvalidParameter("resource grid dimensions must be positive");
}

SchedulerState SchedulerState::with_averages(std::vector<double> averages, double window_tti)
{
    SchedulerState s;
    s.average = std::move(averages);
    s.window_tti = window_tti;
    for (double& a : s.average) a = std::max(a, s.floor);
    return s;
}

Assignment schedule_round_robin(SchedulerState& state, std::size_t n_users, std::size_t n_rb)
{
    if (n_users == 0) throw InvalidParameter("round robin needs at least one user");
    state.cursor %= n_users;
    Assignment out(n_rb);
    for (std::size_t rb = 0; rb < n_rb; ++rb) out[rb] = (state.cursor + rb) % n_users;
    state.cursor = (state.cursor + n_rb) % n_users;
    return out;
}

Assignment schedule_best_cqi(const RateMatrix& rates)
{
    if (rates.rows() == 0) throw InvalidParameter("best-CQI needs at least one user");
    Assignment out(static_cast<std::size_t>(rates.cols()));
    for (Eigen::Index rb = 0; rb < rates.cols(); ++rb) {
        Eigen::Index best = 0;
        for (Eigen::Index u = 1; u < rates.rows(); ++u)
            if (rates(u, rb) > rates(best, rb)) best = u;
        out[static_cast<std::size_t>(rb)] = static_cast<std::size_t>(best);
    }
    return out;
}

std::vector<double> served_throughput(const RateMatrix& rates, const Assignment& assignment, double bandwidth_per_rb_hz)
{
    std::vector<double> served(static_cast<std::size_t>(rates.rows()), 0.0);
    for (std::size_t rb = 0; rb < assignment.size(); ++rb)
        served[assignment[rb]] +=
            rates(static_cast<Eigen::Index>(assignment[rb]), static_cast<Eigen::Index>(rb)) * bandwidth_per_rb_hz;
    return served;
}

Assignment schedule_proportional_fair(const RateMatrix& rates, SchedulerState& state, double bandwidth_per_rb_hz)
{
    const auto n_users = static_cast<std::size_t>(rates.rows());
    if (n_users == 0) throw InvalidParameter("proportional fair needs at least one user");
    if (state.average.size() != n_users) throw InvalidParameter("scheduler state does not match user count");

    Assignment out(static_cast<std::size_t>(rates.cols()));
    for (Eigen::Index rb = 0; rb < rates.cols(); ++rb) {
        std::size_t best = 0;
        for (std::size_t u = 1; u < n_users; ++u) {
            const double r_u = rates(static_cast<Eigen::Index>(u), rb);
            const double r_b = rates(static_cast<Eigen::Index>(best), rb);
            const double a_u = state.average[u];
            const double a_b = state.average[best];
            // Equal averages compare rates directly so the decision is exactly best-CQI's.
            const bool better = (a_u == a_b) ? r_u > r_b : r_u * a_b > r_b * a_u;
            if (better) best = u;
        }
        out[static_cast<std::size_t>(rb)] = best;
    }

    const std::vector<double> served = served_throughput(rates, out, bandwidth_per_rb_hz);
    const double alpha = 1.0 / state.window_tti;
    for (std::size_t u = 0; u < n_users; ++u)
        state.average[u] = std::max((1.0 - alpha) * state.average[u] + alpha * served[u], state.floor);
    return out;
}

Assignment schedule(SchedulerKind kind, const RateMatrix& rates, SchedulerState& state, double bandwidth_per_rb_hz)
{
    switch (kind) {
    case SchedulerKind::RoundRobin:
        return schedule_round_robin(state, static_cast<std::size_t>(rates.rows()), static_cast<std::size_t>(rates.cols()));
    case SchedulerKind::BestCqi:
        return schedule_best_cqi(rates);
    case SchedulerKind::ProportionalFair:
        return schedule_proportional_fair(rates, state, bandwidth_per_rb_hz);
    }
    throw InvalidParameter("unknown scheduler");
}

RateMatrix estimate_rates(std::span<const UserLinkBudget> links, std::size_t tti, const RateContext& context)
{
    if (links.empty()) return RateMatrix(0, 0);
    const std::size_t n_rb = links.front().fading->n_rb();
    RateMatrix rates(static_cast<Eigen::Index>(links.size()), static_cast<Eigen::Index>(n_rb));
    const double mse = context.estimation_mse.value_or(0.0);

    for (std::size_t u = 0; u < links.size(); ++u) {
        const auto& link = links[u];
        if (link.fading == nullptr || tti >= link.fading->n_tti() || link.fading->n_rb() != n_rb)
            throw InvalidParameter("fading trace does not cover the requested TTI");
        if (!(link.sinr > 0.0)) throw InvalidParameter("wideband SINR must be positive");
        const double noise = 1.0 / link.sinr;
        for (std::size_t rb = 0; rb < n_rb; ++rb) {
            const auto& h = link.fading->at(tti, rb);
            double rate = 0.0;
            if (context.mode == RateMode::Siso) {
                const linkmodel::PowerSplit data_only{0.0, 1.0, 1.0};
                const double sinr = linkmodel::post_eq_sinr(data_only, std::norm(h(0, 0)), noise, mse, 1);
                rate = linkmodel::rate_map(sinr, context.map);
            } else {
                if (context.codebook == nullptr) throw InvalidParameter("CLSM rate estimation needs a codebook");
                const double snr = 1.0 / (noise + mse);
                rate = mimo::clsm_transceiver(h, *context.codebook, snr, &context.map).rate;
            }
            rates(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(rb)) = rate;
        }
    }
    return rates;
}

} // namespace ltesim::scheduling
