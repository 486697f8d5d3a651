#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ltesim/geometry.hpp"

namespace ltesim::metrics {

/// Jain's fairness index (sum x)^2 / (n sum x^2).
double jain_index(std::span<const double> x);

/// T(k) = m ln(ln(b k)); m is the multiplexing scale, b the diversity loss factor.
struct GainFit {
    double m = 0.0;
    double b = 0.0;
    double r_squared = 0.0;

    double operator()(double k) const;
};

struct GainPoint {
    double k = 0.0;
    double throughput = 0.0;
};

/// Least squares over (m, b): closed-form m for fixed b, golden-section on
/// log b after a coarse bracketing scan. R^2 is clamped to [0, 1]; constant
/// data yields R^2 = 0.
GainFit fit_loglog_gain(std::span<const GainPoint> points);

double area_spectral_efficiency(std::span<const double> user_throughput_bps, double area_m2, double bandwidth_hz);

struct UserThroughput {
    int user_id = 0;
    double throughput_bps = 0.0;
    geometry::Tier tier = geometry::Tier::Macro;
};

class ThroughputReport {
public:
    ThroughputReport() = default;
    explicit ThroughputReport(std::vector<UserThroughput> users);

    /// Entries sorted by user id.
    const std::vector<UserThroughput>& users() const noexcept { return users_; }
    double cell_sum() const;
    std::vector<double> throughputs() const;

private:
    std::vector<UserThroughput> users_;
};

struct TierSplit {
    std::optional<double> macro;
    std::optional<double> femto;
    double combined = 0.0;
    std::size_t n_macro = 0;
    std::size_t n_femto = 0;
};

TierSplit tier_split_report(const ThroughputReport& report);

} // namespace ltesim::metrics
