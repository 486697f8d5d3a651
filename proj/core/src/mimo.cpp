#include "ltesim/mimo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "ltesim/error.hpp"

namespace ltesim::mimo {

namespace {

CVector random_unit_vector(std::size_t dim, RngStream& rng)
{
    CVector v(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.complex_normal();
    return v / v.norm();
}

} // namespace

Codebook::Codebook(std::vector<CVector> entries, int bits) : entries_(std::move(entries)), bits_(bits)
{
    if (bits < 0 || bits > 20) throw InvalidParameter("codebook bits out of range");
    if (entries_.size() != (std::size_t{1} << bits))
        throw InvalidParameter("codebook size must equal 2^bits (" + std::to_string(bits) + " bits, " +
                               std::to_string(entries_.size()) + " entries)");
    const Eigen::Index dim = entries_.front().size();
    for (const auto& e : entries_) {
        if (e.size() != dim) throw InvalidParameter("codebook entries differ in dimension");
        if (std::abs(e.norm() - 1.0) > 1e-12) throw InvalidParameter("codebook entries must have unit norm");
    }
}

Codebook Codebook::random(std::size_t dim, int bits, RngStream& rng)
{
    if (dim == 0) throw InvalidParameter("codebook dimension must be >= 1");
    std::vector<CVector> entries;
    entries.reserve(std::size_t{1} << bits);
    for (std::size_t i = 0; i < (std::size_t{1} << bits); ++i) entries.push_back(random_unit_vector(dim, rng));
    return Codebook(std::move(entries), bits);
}

void PrecoderCodebook::add_rank(std::vector<CMatrix> precoders)
{
    if (precoders.empty()) throw InvalidParameter("precoder set must be non-empty");
    const auto rank = static_cast<Eigen::Index>(by_rank_.size() + 1);
    for (const auto& w : precoders)
        if (w.cols() != rank) throw InvalidParameter("precoder column count must equal its rank");
    by_rank_.push_back(std::move(precoders));
}

PrecoderCodebook PrecoderCodebook::random(std::size_t n_tx, std::size_t max_rank, int bits_per_rank, RngStream& rng)
{
    if (max_rank == 0 || max_rank > n_tx) throw InvalidParameter("max rank must lie in [1, n_tx]");
    PrecoderCodebook book;
    const auto n = static_cast<Eigen::Index>(n_tx);
    for (std::size_t r = 1; r <= max_rank; ++r) {
        std::vector<CMatrix> set;
        for (std::size_t i = 0; i < (std::size_t{1} << bits_per_rank); ++i) {
            CMatrix g(n, static_cast<Eigen::Index>(r));
            for (Eigen::Index c = 0; c < g.cols(); ++c)
                for (Eigen::Index k = 0; k < n; ++k) g(k, c) = rng.complex_normal();
            Eigen::HouseholderQR<CMatrix> qr(g);
            set.push_back(qr.householderQ() * CMatrix::Identity(n, static_cast<Eigen::Index>(r)));
        }
        book.add_rank(std::move(set));
    }
    return book;
}

SuResult su_svd_transceiver(const CMatrix& channel, double snr)
{
    if (!(snr > 0.0)) throw InvalidParameter("SNR must be positive");
    const Eigen::JacobiSVD<CMatrix> svd(channel);
    const Eigen::VectorXd& sv = svd.singularValues();

    std::vector<double> gains;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > 0.0) gains.push_back(sv(i) * sv(i));
    SuResult out;
    if (gains.empty()) return out;

    // Largest active set whose water level stays above every inverse gain.
    std::size_t active = gains.size();
    double level = 0.0;
    for (; active > 0; --active) {
        double inv_sum = 0.0;
        for (std::size_t i = 0; i < active; ++i) inv_sum += 1.0 / (snr * gains[i]);
        level = (1.0 + inv_sum) / static_cast<double>(active);
        if (level > 1.0 / (snr * gains[active - 1])) break;
    }
    for (std::size_t i = 0; i < active; ++i) {
        const double p = level - 1.0 / (snr * gains[i]);
        const double sinr = p * gains[i] * snr;
        out.stream_sinr.push_back(sinr);
        out.rate += std::log2(1.0 + sinr);
    }
    return out;
}

namespace {

constexpr Eigen::Index kSmall = 8;
using SmallMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, 0, kSmall, kSmall>;

// Per-stream MMSE SINR from the Gram matrix H^H H, written into `out`.
template <int R>
void mmse_sinr_fixed(const SmallMatrix& gram, const CMatrix& precoder, double scale, double* out)
{
    using Square = Eigen::Matrix<Complex, R, R>;
    Square a = scale * (precoder.adjoint() * gram * precoder);
    a.diagonal().array() += 1.0;
    const Square inv = a.inverse();
    for (int s = 0; s < R; ++s) out[s] = std::max(1.0 / inv(s, s).real() - 1.0, 0.0);
}

void mmse_sinr_gram(const SmallMatrix& gram, const CMatrix& precoder, double snr, double* out)
{
    const auto rank = precoder.cols();
    const double scale = snr / static_cast<double>(rank);
    switch (rank) {
    case 1: {
        const double q = scale * (precoder.col(0).adjoint() * gram * precoder.col(0)).value().real();
        out[0] = std::max(q, 0.0);
        return;
    }
    case 2: mmse_sinr_fixed<2>(gram, precoder, scale, out); return;
    case 3: mmse_sinr_fixed<3>(gram, precoder, scale, out); return;
    case 4: mmse_sinr_fixed<4>(gram, precoder, scale, out); return;
    default: break;
    }
    SmallMatrix a = scale * (precoder.adjoint() * gram * precoder);
    a.diagonal().array() += 1.0;
    const SmallMatrix inv = a.inverse();
    for (Eigen::Index s = 0; s < rank; ++s) out[s] = std::max(1.0 / inv(s, s).real() - 1.0, 0.0);
}

} // namespace

std::vector<double> mmse_stream_sinr(const CMatrix& channel, const CMatrix& precoder, double snr)
{
    const auto rank = precoder.cols();
    std::vector<double> sinr(static_cast<std::size_t>(rank));
    if (channel.cols() <= kSmall && rank <= kSmall) {
        const SmallMatrix gram = channel.adjoint() * channel;
        mmse_sinr_gram(gram, precoder, snr, sinr.data());
        return sinr;
    }
    const CMatrix g = std::sqrt(snr / static_cast<double>(rank)) * (channel * precoder);
    const CMatrix a = CMatrix::Identity(rank, rank) + g.adjoint() * g;
    const CMatrix inv = a.inverse();
    for (Eigen::Index s = 0; s < rank; ++s) sinr[static_cast<std::size_t>(s)] = std::max(1.0 / inv(s, s).real() - 1.0, 0.0);
    return sinr;
}

ClsmResult clsm_transceiver(const CMatrix& channel, const PrecoderCodebook& codebook, double snr,
                            const linkmodel::RateMap* map)
{
    if (!(snr > 0.0)) throw InvalidParameter("SNR must be positive");
    const auto max_rank = std::min({codebook.max_rank(), static_cast<std::size_t>(channel.rows()),
                                    static_cast<std::size_t>(channel.cols())});
    const bool small = channel.cols() <= kSmall;
    SmallMatrix gram;
    if (small) gram = channel.adjoint() * channel;
    double buffer[kSmall];
    ClsmResult best;
    bool have = false;
    for (std::size_t r = 1; r <= max_rank; ++r) {
        const auto& set = codebook.rank(r);
        for (std::size_t i = 0; i < set.size(); ++i) {
            std::vector<double> dynamic;
            const double* sinr = buffer;
            if (small && r <= static_cast<std::size_t>(kSmall)) {
                mmse_sinr_gram(gram, set[i], snr, buffer);
            } else {
                dynamic = mmse_stream_sinr(channel, set[i], snr);
                sinr = dynamic.data();
            }
            double rate = 0.0;
            for (std::size_t s = 0; s < r; ++s) rate += map ? linkmodel::rate_map(sinr[s], *map) : std::log2(1.0 + sinr[s]);
            if (!have || rate > best.rate) {
                best = {r, i, rate, std::vector<double>(sinr, sinr + r)};
                have = true;
            }
        }
    }
    return best;
}

EffectiveChannel receive_combining(const CMatrix& channel)
{
    EffectiveChannel out;
    if (channel.rows() == 1) {
        out.row = channel.row(0);
        out.combiner = CVector::Ones(1);
        return out;
    }
    if (channel.norm() == 0.0) {
        out.row = CRow::Zero(channel.cols());
        out.combiner = CVector::Zero(channel.rows());
        out.combiner(0) = 1.0;
        return out;
    }
    const Eigen::JacobiSVD<CMatrix> svd(channel, Eigen::ComputeThinU);
    CVector u = svd.matrixU().col(0);
    // Fix the phase so the first entry is real non-negative.
    if (std::abs(u(0)) > 0.0) u *= std::conj(u(0)) / std::abs(u(0));
    out.combiner = u;
    out.row = u.adjoint() * channel;
    return out;
}

Quantization quantize_csit(const CRow& row, const Codebook& codebook)
{
    const double norm = row.norm();
    if (norm == 0.0) throw DegenerateChannel("cannot quantize a zero channel");
    if (static_cast<std::size_t>(row.size()) != codebook.dim())
        throw InvalidParameter("channel dimension does not match codebook");
    const CRow unit = row / norm;
    Quantization q;
    q.correlation = -1.0;
    for (std::size_t i = 0; i < codebook.size(); ++i) {
        const double c = std::norm((unit * codebook.entry(i)).value());
        if (c > q.correlation) {
            q.correlation = c;
            q.index = i;
        }
    }
    q.direction = codebook.entry(q.index).adjoint();
    return q;
}

DasReport das_feedback_allocation(const CRow& row, std::span<const AntennaGroup> groups,
                                  std::span<const double> group_pathloss_db, std::span<const Codebook> codebooks)
{
    if (groups.empty()) throw InvalidParameter("at least one antenna group is required");
    if (group_pathloss_db.size() != groups.size() || codebooks.size() != groups.size())
        throw InvalidParameter("groups, pathlosses and codebooks must have equal length");
    std::size_t covered = 0;
    for (const auto& g : groups) {
        if (g.size == 0) throw InvalidParameter("antenna groups must be non-empty");
        if (g.offset != covered) throw InvalidParameter("antenna groups must partition the array in order");
        covered += g.size;
    }
    if (covered != static_cast<std::size_t>(row.size()))
        throw InvalidParameter("antenna groups do not cover the channel row");

    std::size_t best = 0;
    for (std::size_t g = 1; g < groups.size(); ++g)
        if (group_pathloss_db[g] < group_pathloss_db[best]) best = g;

    const auto& group = groups[best];
    const CRow sub = row.segment(static_cast<Eigen::Index>(group.offset), static_cast<Eigen::Index>(group.size));
    const Quantization q = quantize_csit(sub, codebooks[best]);

    DasReport report;
    report.group = best;
    report.index = q.index;
    report.gain = sub.squaredNorm();
    report.correlation = q.correlation;
    report.direction = CRow::Zero(row.size());
    report.direction.segment(static_cast<Eigen::Index>(group.offset), static_cast<Eigen::Index>(group.size)) =
        q.direction;
    return report;
}

double PrecodingDecision::total_power() const
{
    double p = 0.0;
    for (std::size_t i = 0; i < power.size(); ++i)
        p += power[i] * precoder.col(static_cast<Eigen::Index>(i)).squaredNorm();
    return p;
}

PrecodingDecision zf_precoder(const CMatrix& rows, double total_power, std::vector<std::size_t> users)
{
    const Eigen::Index k = rows.rows();
    const Eigen::Index n = rows.cols();
    if (users.empty())
        for (Eigen::Index i = 0; i < k; ++i) users.push_back(static_cast<std::size_t>(i));
    if (users.size() != static_cast<std::size_t>(k)) throw InvalidParameter("user list does not match row count");

    PrecodingDecision d;
    d.mode = Mode::Zf;
    d.users = std::move(users);
    if (k == 0) {
        d.precoder = CMatrix::Zero(n, 0);
        return d;
    }
    if (k > n) throw SingularSet("more users than transmit antennas");

    const CMatrix gram = rows * rows.adjoint();
    const Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram);
    const Eigen::VectorXd& lambda = eig.eigenvalues(); // ascending
    if (!(lambda(k - 1) > 0.0) || lambda(0) < 1e-20 * lambda(k - 1))
        throw SingularSet("stacked channel rows are rank deficient");

    const CMatrix gram_inv =
        eig.eigenvectors() * lambda.cwiseInverse().asDiagonal() * eig.eigenvectors().adjoint();
    d.precoder = rows.adjoint() * gram_inv;
    for (Eigen::Index j = 0; j < k; ++j) d.precoder.col(j).normalize();
    d.power.assign(static_cast<std::size_t>(k), total_power / static_cast<double>(k));
    return d;
}

double zf_sum_rate_estimate(std::span<const ZfCandidate> candidates, std::span<const std::size_t> set,
                            std::size_t n_tx, double total_power, CsitMode mode, const linkmodel::RateMap* map)
{
    if (set.empty()) return 0.0;
    CMatrix rows(static_cast<Eigen::Index>(set.size()), static_cast<Eigen::Index>(n_tx));
    for (std::size_t i = 0; i < set.size(); ++i) rows.row(static_cast<Eigen::Index>(i)) = candidates[set[i]].estimate;

    PrecodingDecision d;
    try {
        d = zf_precoder(rows, total_power);
    } catch (const SingularSet&) {
        return 0.0;
    }

    double rate = 0.0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        const ZfCandidate& c = candidates[set[i]];
        const auto idx = static_cast<Eigen::Index>(i);
        const double signal = d.power[i] * std::norm((rows.row(idx) * d.precoder.col(idx)).value());
        double leakage = 0.0;
        if (mode == CsitMode::Quantized && n_tx > 1) {
            const double others = total_power - d.power[i];
            leakage = c.estimate.squaredNorm() * c.quantization_error / static_cast<double>(n_tx - 1) * others;
        }
        const double sinr = signal / (c.noise + leakage);
        rate += map ? linkmodel::rate_map(sinr, *map) : std::log2(1.0 + sinr);
    }
    return rate;
}

std::vector<std::size_t> zf_user_selection(std::span<const ZfCandidate> candidates, std::size_t n_tx,
                                           double total_power, CsitMode mode, const linkmodel::RateMap* map)
{
    const auto grow = [&](std::vector<std::size_t> set, double rate) {
        std::vector<bool> taken(candidates.size(), false);
        for (std::size_t u : set) taken[u] = true;
        while (set.size() < n_tx) {
            std::size_t best = candidates.size();
            double best_rate = rate;
            std::vector<std::size_t> trial = set;
            trial.push_back(0);
            for (std::size_t u = 0; u < candidates.size(); ++u) {
                if (taken[u]) continue;
                trial.back() = u;
                const double r = zf_sum_rate_estimate(candidates, trial, n_tx, total_power, mode, map);
                if (r > best_rate) {
                    best_rate = r;
                    best = u;
                }
            }
            if (best == candidates.size()) break;
            taken[best] = true;
            set.push_back(best);
            rate = best_rate;
        }
        return std::make_pair(set, rate);
    };

    // Greedy from the empty set, then from every single seed user; keep the best.
    auto [selected, current] = grow({}, 0.0);
    if (n_tx > 0)
        for (std::size_t s = 0; s < candidates.size(); ++s) {
            const std::vector<std::size_t> seed{s};
            auto [set, rate] = grow(seed, zf_sum_rate_estimate(candidates, seed, n_tx, total_power, mode, map));
            if (rate > current * (1.0 + 1e-12)) {
                selected = std::move(set);
                current = rate;
            }
        }
    std::vector<bool> used(candidates.size(), false);
    for (std::size_t u : selected) used[u] = true;

    // Local search: take the best single add, drop or swap while it raises the estimate.
    for (std::size_t pass = 0; pass < 4 * candidates.size(); ++pass) {
        double best_rate = current * (1.0 + 1e-12);
        std::vector<std::size_t> best_set;
        const auto consider = [&](const std::vector<std::size_t>& trial) {
            const double r = zf_sum_rate_estimate(candidates, trial, n_tx, total_power, mode, map);
            if (r > best_rate) {
                best_rate = r;
                best_set = trial;
            }
        };
        for (std::size_t u = 0; u < candidates.size(); ++u) {
            if (used[u]) continue;
            std::vector<std::size_t> trial = selected;
            if (trial.size() < n_tx) {
                trial.push_back(u);
                consider(trial);
                trial.pop_back();
            }
            for (std::size_t i = 0; i < selected.size(); ++i) {
                trial[i] = u;
                consider(trial);
                trial[i] = selected[i];
            }
        }
        if (selected.size() > 1)
            for (std::size_t i = 0; i < selected.size(); ++i) {
                std::vector<std::size_t> trial = selected;
                trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(i));
                consider(trial);
            }
        if (best_set.empty()) break;
        for (std::size_t u : selected) used[u] = false;
        for (std::size_t u : best_set) used[u] = true;
        selected = std::move(best_set);
        current = best_rate;
    }
    return selected;
}

UnitaryCodebook::UnitaryCodebook(std::vector<CMatrix> matrices) : matrices_(std::move(matrices))
{
    if (matrices_.empty()) throw InvalidParameter("unitary codebook must be non-empty");
    for (const auto& m : matrices_) {
        if (m.rows() != m.cols()) throw InvalidParameter("unitary codebook entries must be square");
        if (!(m.adjoint() * m).isIdentity(1e-9)) throw InvalidParameter("codebook entry is not unitary");
    }
}

UnitaryCodebook UnitaryCodebook::dft_rotated(std::size_t n_tx, int bits)
{
    const auto n = static_cast<Eigen::Index>(n_tx);
    const std::size_t count = std::size_t{1} << bits;
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_tx));
    std::vector<CMatrix> mats;
    for (std::size_t g = 0; g < count; ++g) {
        CMatrix m(n, n);
        for (Eigen::Index row = 0; row < n; ++row) {
            // Rotation diag(e^{j 2 pi g row / (n 2^bits)}) applied to the DFT matrix.
            const double rot = 2.0 * std::numbers::pi * static_cast<double>(g) * static_cast<double>(row) /
                               (static_cast<double>(n) * static_cast<double>(count));
            for (Eigen::Index col = 0; col < n; ++col) {
                const double dft = 2.0 * std::numbers::pi * static_cast<double>(row * col) / static_cast<double>(n);
                m(row, col) = scale * std::polar(1.0, rot + dft);
            }
        }
        mats.push_back(std::move(m));
    }
    return UnitaryCodebook(std::move(mats));
}

Pu2rcReport pu2rc_report(std::size_t user, const CRow& row, double noise, double total_power,
                         const UnitaryCodebook& codebook)
{
    const std::size_t n = codebook.n_tx();
    const double per_column = total_power / static_cast<double>(n);
    Pu2rcReport best{user, 0, 0, -1.0};
    for (std::size_t g = 0; g < codebook.size(); ++g) {
        const CRow projected = row * codebook.matrix(g);
        const double total = projected.squaredNorm();
        for (std::size_t c = 0; c < n; ++c) {
            const double sig = std::norm(projected(static_cast<Eigen::Index>(c)));
            const double sinr = per_column * sig / (noise + per_column * (total - sig));
            if (sinr > best.sinr) best = {user, g, c, sinr};
        }
    }
    return best;
}

double quantize_sinr_report(double sinr, double min_db, double step_db, int levels)
{
    int level = 0;
    if (sinr > 0.0) {
        const double db = 10.0 * std::log10(sinr);
        level = std::clamp(static_cast<int>(std::floor((db - min_db) / step_db)), 0, levels - 1);
    }
    return std::pow(10.0, (min_db + step_db * level) / 10.0);
}

namespace {

// Best reporter per column of `matrix`; npos where nobody reported.
std::vector<std::size_t> column_winners(std::span<const Pu2rcReport> reports, std::size_t matrix, std::size_t n_columns)
{
    std::vector<std::size_t> winner(n_columns, reports.size());
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        if (r.matrix != matrix || r.column >= n_columns) continue;
        std::size_t& w = winner[r.column];
        if (w == reports.size() || r.sinr > reports[w].sinr ||
            (r.sinr == reports[w].sinr && r.user < reports[w].user))
            w = i;
    }
    return winner;
}

} // namespace

double pu2rc_matrix_score(std::span<const Pu2rcReport> reports, std::size_t matrix, std::size_t n_columns,
                          const linkmodel::RateMap& map)
{
    double score = 0.0;
    for (std::size_t w : column_winners(reports, matrix, n_columns))
        if (w != reports.size()) score += linkmodel::rate_map(reports[w].sinr, map);
    return score;
}

PrecodingDecision pu2rc_transceiver(std::span<const Pu2rcReport> reports, const UnitaryCodebook& codebook,
                                    double total_power, const linkmodel::RateMap& map)
{
    const std::size_t n = codebook.n_tx();
    PrecodingDecision d;
    d.mode = Mode::Pu2rc;
    d.precoder = CMatrix::Zero(static_cast<Eigen::Index>(n), 0);
    if (reports.empty()) return d;

    std::size_t best = 0;
    double best_score = -1.0;
    for (std::size_t g = 0; g < codebook.size(); ++g) {
        const double s = pu2rc_matrix_score(reports, g, n, map);
        if (s > best_score) {
            best_score = s;
            best = g;
        }
    }

    std::vector<Eigen::Index> cols;
    for (std::size_t c = 0; const std::size_t w : column_winners(reports, best, n)) {
        if (w != reports.size()) {
            d.users.push_back(reports[w].user);
            cols.push_back(static_cast<Eigen::Index>(c));
        }
        ++c;
    }
    d.precoder = CMatrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i)
        d.precoder.col(static_cast<Eigen::Index>(i)) = codebook.matrix(best).col(cols[i]);
    if (!cols.empty()) d.power.assign(cols.size(), total_power / static_cast<double>(cols.size()));
    return d;
}

std::vector<double> mu_sinr(const PrecodingDecision& decision, const CMatrix& true_rows, std::span<const double> noise)
{
    const std::size_t k = decision.users.size();
    if (static_cast<std::size_t>(true_rows.rows()) != k || noise.size() != k)
        throw InvalidParameter("true rows and noise must match the served set");
    // gains(i, j) = |h_i w_j|^2
    const Eigen::MatrixXd gains = (true_rows * decision.precoder).cwiseAbs2();
    std::vector<double> sinr(k);
    for (std::size_t i = 0; i < k; ++i) {
        double interference = 0.0;
        for (std::size_t j = 0; j < k; ++j)
            if (j != i) interference += decision.power[j] * gains(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        sinr[i] = decision.power[i] * gains(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) /
                  (noise[i] + interference);
    }
    return sinr;
}

std::vector<double> mu_sinr_mmse(const PrecodingDecision& decision, std::span<const CMatrix> channels,
                                 std::span<const double> noise)
{
    const std::size_t k = decision.users.size();
    if (channels.size() != k || noise.size() != k) throw InvalidParameter("channels and noise must match the served set");
    std::vector<double> sinr(k);
    for (std::size_t i = 0; i < k; ++i) {
        const CMatrix& h = channels[i];
        if (h.cols() != decision.precoder.rows()) throw InvalidParameter("channel width does not match the precoder");
        const CMatrix x = h * decision.precoder; // n_rx x k received directions
        CMatrix cov = noise[i] * CMatrix::Identity(h.rows(), h.rows());
        for (std::size_t j = 0; j < k; ++j)
            if (j != i) cov += decision.power[j] * x.col(static_cast<Eigen::Index>(j)) * x.col(static_cast<Eigen::Index>(j)).adjoint();
        const CVector s = x.col(static_cast<Eigen::Index>(i));
        sinr[i] = decision.power[i] * (s.adjoint() * cov.ldlt().solve(s)).value().real();
    }
    return sinr;
}

} // namespace ltesim::mimo
