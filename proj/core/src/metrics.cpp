#include "ltesim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ltesim/error.hpp"

namespace ltesim::metrics {

double jain_index(std::span<const double> x)
{
    if (x.empty()) throw InvalidParameter("Jain index of an empty vector");
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double v : x) {
        if (v < 0.0) throw InvalidParameter("Jain index needs non-negative values");
        sum += v;
        sum_sq += v * v;
    }
    if (sum_sq == 0.0) throw UndefinedFairness("Jain index is undefined for an all-zero vector");
    return sum * sum / (static_cast<double>(x.size()) * sum_sq);
}

double GainFit::operator()(double k) const
{
    return m * std::log(std::log(b * k));
}

namespace {

struct FitAtB {
    double m = 0.0;
    double sse = std::numeric_limits<double>::infinity();
};

FitAtB fit_for_b(std::span<const GainPoint> points, double b)
{
    double sxy = 0.0;
    double sxx = 0.0;
    for (const auto& p : points) {
        const double x = std::log(std::log(b * p.k));
        sxy += x * p.throughput;
        sxx += x * x;
    }
    FitAtB out;
    if (!(sxx > 0.0) || !std::isfinite(sxx)) return out;
    out.m = sxy / sxx;
    out.sse = 0.0;
    for (const auto& p : points) {
        const double r = p.throughput - out.m * std::log(std::log(b * p.k));
        out.sse += r * r;
    }
    return out;
}

} // namespace

GainFit fit_loglog_gain(std::span<const GainPoint> points)
{
    if (points.size() < 3) throw InvalidParameter("log-log fit needs at least 3 points");
    double k_min = std::numeric_limits<double>::infinity();
    for (const auto& p : points) {
        if (!(p.k >= 2.0)) throw InvalidParameter("log-log fit needs k >= 2");
        k_min = std::min(k_min, p.k);
    }

    // ln(b k) must stay positive for every point: b > 1 / k_min.
    const double lo = std::log(1.0 / k_min) + 1e-6;
    const double hi = std::log(1e4);
    constexpr int kScan = 400;
    double best_t = lo;
    double best_sse = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kScan; ++i) {
        const double t = lo + (hi - lo) * i / kScan;
        const double sse = fit_for_b(points, std::exp(t)).sse;
        if (sse < best_sse) {
            best_sse = sse;
            best_t = t;
        }
    }

    const double step = (hi - lo) / kScan;
    double a = std::max(lo, best_t - step);
    double c = std::min(hi, best_t + step);
    constexpr double kGolden = 0.61803398874989484820;
    double x1 = c - kGolden * (c - a);
    double x2 = a + kGolden * (c - a);
    double f1 = fit_for_b(points, std::exp(x1)).sse;
    double f2 = fit_for_b(points, std::exp(x2)).sse;
    for (int i = 0; i < 200 && (c - a) > 1e-12; ++i) {
        if (f1 < f2) {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - kGolden * (c - a);
            f1 = fit_for_b(points, std::exp(x1)).sse;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kGolden * (c - a);
            f2 = fit_for_b(points, std::exp(x2)).sse;
        }
    }
    double t = 0.5 * (a + c);
    FitAtB fit = fit_for_b(points, std::exp(t));
    if (best_sse < fit.sse) {
        t = best_t;
        fit = fit_for_b(points, std::exp(t));
    }

    GainFit out;
    out.b = std::exp(t);
    out.m = fit.m;

    double mean = 0.0;
    for (const auto& p : points) mean += p.throughput;
    mean /= static_cast<double>(points.size());
    double sst = 0.0;
    for (const auto& p : points) sst += (p.throughput - mean) * (p.throughput - mean);
    out.r_squared = sst > 0.0 ? std::clamp(1.0 - fit.sse / sst, 0.0, 1.0) : 0.0;
    return out;
}

double area_spectral_efficiency(std::span<const double> user_throughput_bps, double area_m2, double bandwidth_hz)
{
    if (!(area_m2 > 0.0) || !(bandwidth_hz > 0.0)) throw InvalidParameter("area and bandwidth must be positive");
    double sum = 0.0;
    for (double t : user_throughput_bps) sum += t;
    return sum / (area_m2 * bandwidth_hz);
}

ThroughputReport::ThroughputReport(std::vector<UserThroughput> users) : users_(std::move(users))
{
    std::stable_sort(users_.begin(), users_.end(),
                     [](const UserThroughput& a, const UserThroughput& b) { return a.user_id < b.user_id; });
}

double ThroughputReport::cell_sum() const
{
    double s = 0.0;
    for (const auto& u : users_) s += u.throughput_bps;
    return s;
}

std::vector<double> ThroughputReport::throughputs() const
{
    std::vector<double> out;
    out.reserve(users_.size());
    for (const auto& u : users_) out.push_back(u.throughput_bps);
    return out;
}

TierSplit tier_split_report(const ThroughputReport& report)
{
    if (report.users().empty()) throw InvalidParameter("tier split of an empty report");
    TierSplit out;
    double macro_sum = 0.0;
    double femto_sum = 0.0;
    for (const auto& u : report.users()) {
        if (u.tier == geometry::Tier::Macro) {
            macro_sum += u.throughput_bps;
            ++out.n_macro;
        } else {
            femto_sum += u.throughput_bps;
            ++out.n_femto;
        }
    }
    if (out.n_macro > 0) out.macro = macro_sum / static_cast<double>(out.n_macro);
    if (out.n_femto > 0) out.femto = femto_sum / static_cast<double>(out.n_femto);
    out.combined = (macro_sum + femto_sum) / static_cast<double>(report.users().size());
    return out;
}

} // namespace ltesim::metrics
