// Brute-force reference implementations. Slow and direct on purpose; none of
// them call into the library code they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using CMatrix = Eigen::MatrixXcd;
using CRow = Eigen::RowVectorXcd;

inline double mean(const std::vector<double>& v)
{
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v)
{
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

inline double jain(const std::vector<double>& x)
{
    double s = 0.0;
    double s2 = 0.0;
    for (double v : x) {
        s += v;
        s2 += v * v;
    }
    return s * s / (static_cast<double>(x.size()) * s2);
}

/// J0 by its power series; fine for |x| < 10.
inline double bessel_j0(double x)
{
    double term = 1.0;
    double sum = 1.0;
    const double q = x * x / 4.0;
    for (int k = 1; k < 60; ++k) {
        term *= -q / (static_cast<double>(k) * k);
        sum += term;
    }
    return sum;
}

inline double rate_map(double sinr, double eta = 0.75, double cap = 4.5)
{
    return std::min(eta * std::log2(1.0 + sinr), cap);
}

/// Max over a power grid of sum log2(1 + p_i g_i snr), sum p_i = 1; up to 3 modes.
inline double water_filling_grid(const std::vector<double>& gains, double snr, int steps)
{
    double best = 0.0;
    const auto rate = [&](const std::vector<double>& p) {
        double r = 0.0;
        for (std::size_t i = 0; i < gains.size(); ++i) r += std::log2(1.0 + p[i] * gains[i] * snr);
        return r;
    };
    if (gains.size() == 1) return rate({1.0});
    for (int a = 0; a <= steps; ++a) {
        const double pa = static_cast<double>(a) / steps;
        if (gains.size() == 2) {
            best = std::max(best, rate({pa, 1.0 - pa}));
            continue;
        }
        for (int b = 0; a + b <= steps; ++b) {
            const double pb = static_cast<double>(b) / steps;
            best = std::max(best, rate({pa, pb, 1.0 - pa - pb}));
        }
    }
    return best;
}

/// Index of the entry with the largest |<row, entry>|^2, first wins.
inline std::size_t quantize_scan(const CRow& row, const std::vector<Eigen::VectorXcd>& entries)
{
    std::size_t best = 0;
    double best_c = -1.0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        std::complex<double> dot = 0.0;
        for (Eigen::Index j = 0; j < row.size(); ++j) dot += row(j) * entries[i](j);
        const double c = std::norm(dot);
        if (c > best_c) {
            best_c = c;
            best = i;
        }
    }
    return best;
}

/// Equal-power ZF Shannon sum rate of the given rows (unit noise), through the
/// Moore-Penrose pseudo-inverse.
inline double zf_rate(const CMatrix& rows, double total_power)
{
    const Eigen::Index k = rows.rows();
    if (k == 0) return 0.0;
    const Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(rows);
    if (cod.rank() < k) return 0.0;
    CMatrix w = cod.pseudoInverse();
    double r = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
        w.col(j) /= w.col(j).norm();
        r += std::log2(1.0 + std::norm((rows.row(j) * w.col(j)).value()) * total_power / static_cast<double>(k));
    }
    return r;
}

/// Best equal-power ZF rate over every subset of size 1..max_size.
inline double zf_exhaustive(const std::vector<CRow>& users, std::size_t max_size, double total_power)
{
    const std::size_t n = users.size();
    double best = 0.0;
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
        std::vector<std::size_t> set;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (std::size_t{1} << i)) set.push_back(i);
        if (set.size() > max_size) continue;
        CMatrix rows(static_cast<Eigen::Index>(set.size()), users[0].size());
        for (std::size_t i = 0; i < set.size(); ++i) rows.row(static_cast<Eigen::Index>(i)) = users[set[i]];
        best = std::max(best, zf_rate(rows, total_power));
    }
    return best;
}

/// Linear MMSE SINR of each column of H W, equal power snr / r per stream,
/// unit noise, by explicit interference-plus-noise covariance inversion.
inline std::vector<double> mmse_sinr(const CMatrix& h, const CMatrix& w, double snr)
{
    const CMatrix eff = h * w;
    const double p = snr / static_cast<double>(w.cols());
    std::vector<double> out;
    for (Eigen::Index s = 0; s < eff.cols(); ++s) {
        CMatrix cov = CMatrix::Identity(h.rows(), h.rows());
        for (Eigen::Index j = 0; j < eff.cols(); ++j)
            if (j != s) cov += p * eff.col(j) * eff.col(j).adjoint();
        out.push_back(p * (eff.col(s).adjoint() * cov.inverse() * eff.col(s)).value().real());
    }
    return out;
}

/// Pilot/data SINR written out from the model definition.
struct SplitModel {
    double c_noise = 1.0;
    double c_floor = 1e-5;
    double density = 1.0;
    double velocity = 0.0;
    double noise = 0.01;
    double gain = 1.0;
    int streams = 1;

    double sinr(double p_pilot, double p_data) const
    {
        const double mse = c_noise * noise / (density * p_pilot) + c_floor * velocity * velocity;
        return p_data * gain / (noise + p_data * mse * streams);
    }
};

/// Pilot fraction maximizing the SINR over a uniform grid of `n` points.
inline double best_pilot_fraction_grid(const SplitModel& m, double budget, std::size_t n)
{
    double best_f = 0.0;
    double best_s = -1.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double f = static_cast<double>(i) / static_cast<double>(n);
        const double s = m.sinr(f * budget, (1.0 - f) * budget);
        if (s > best_s) {
            best_s = s;
            best_f = f;
        }
    }
    return best_f;
}

/// Smallest p_p + p_d on an n x n grid over [0, budget]^2 whose SINR reaches `target`.
inline double min_total_grid(const SplitModel& m, double budget, double target, std::size_t n)
{
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i <= n; ++i) {
        const double pp = budget * static_cast<double>(i) / static_cast<double>(n);
        for (std::size_t j = 1; j <= n; ++j) {
            const double pd = budget * static_cast<double>(j) / static_cast<double>(n);
            if (pp + pd > budget * (1.0 + 1e-12)) break;
            if (m.sinr(pp, pd) >= target) {
                best = std::min(best, pp + pd);
                break;
            }
        }
    }
    return best;
}

/// SINR under CFO from the closed form with an independent sinc.
inline double sinr_cfo(double snr, double eps)
{
    const double s = eps == 0.0 ? 1.0 : std::sin(M_PI * eps) / (M_PI * eps);
    return snr * s * s / (1.0 + snr * (1.0 - s * s));
}

/// Argmax per column, lowest row on ties.
inline std::vector<std::size_t> column_argmax(const Eigen::MatrixXd& m)
{
    std::vector<std::size_t> out;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        Eigen::Index best = 0;
        for (Eigen::Index r = 1; r < m.rows(); ++r)
            if (m(r, c) > m(best, c)) best = r;
        out.push_back(static_cast<std::size_t>(best));
    }
    return out;
}

} // namespace oracle
