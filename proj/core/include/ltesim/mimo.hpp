#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ltesim/linkmodel.hpp"
#include "ltesim/rng.hpp"

namespace ltesim::mimo {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using CRow = Eigen::RowVectorXcd;

/// Vector codebook of 2^bits unit-norm beamforming vectors.
class Codebook {
public:
    Codebook(std::vector<CVector> entries, int bits);

    /// Random vector quantization: entries i.i.d. uniform on the unit sphere.
    static Codebook random(std::size_t dim, int bits, RngStream& rng);

    std::size_t size() const noexcept { return entries_.size(); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(entries_.front().size()); }
    int bits() const noexcept { return bits_; }
    const CVector& entry(std::size_t i) const { return entries_[i]; }

private:
    std::vector<CVector> entries_;
    int bits_;
};

/// Semi-unitary precoders per transmission rank (index 0 holds rank 1).
class PrecoderCodebook {
public:
    void add_rank(std::vector<CMatrix> precoders);

    /// Random orthonormal-column precoders, 2^bits_per_rank per rank.
    static PrecoderCodebook random(std::size_t n_tx, std::size_t max_rank, int bits_per_rank, RngStream& rng);

    std::size_t max_rank() const noexcept { return by_rank_.size(); }
    const std::vector<CMatrix>& rank(std::size_t r) const { return by_rank_.at(r - 1); }

private:
    std::vector<std::vector<CMatrix>> by_rank_;
};

struct SuResult {
    double rate = 0.0;
    std::vector<double> stream_sinr;
};

/// Water-filling over the singular modes of H, total power 1, noise 1/snr.
/// `rate` is the Shannon sum rate; stream_sinr lists only active modes.
SuResult su_svd_transceiver(const CMatrix& channel, double snr);

struct ClsmResult {
    std::size_t rank = 0;
    std::size_t index = 0;
    double rate = 0.0;
    std::vector<double> stream_sinr;
};

/// Per-stream MMSE SINR for precoder W, equal power snr / rank per stream.
std::vector<double> mmse_stream_sinr(const CMatrix& channel, const CMatrix& precoder, double snr);

/// Exhaustive (rank, precoder) search. Ranks above min(n_rx, n_tx) are
/// skipped. The objective is the Shannon sum rate, or the sum of `map`
/// over streams when a rate map is given.
ClsmResult clsm_transceiver(const CMatrix& channel, const PrecoderCodebook& codebook, double snr,
                            const linkmodel::RateMap* map = nullptr);

/// One-stream receive combining with the dominant left singular vector.
struct EffectiveChannel {
    CRow row;
    CVector combiner;
};

EffectiveChannel receive_combining(const CMatrix& channel);

struct Quantization {
    std::size_t index = 0;
    CRow direction; ///< unit-norm quantized channel direction (conjugate of the entry)
    double correlation = 0.0; ///< |<h/|h|, entry>|^2
};

Quantization quantize_csit(const CRow& row, const Codebook& codebook);

struct AntennaGroup {
    std::size_t offset = 0;
    std::size_t size = 0;
};

struct DasReport {
    std::size_t group = 0;
    std::size_t index = 0;
    double gain = 0.0; ///< |h_group|^2, unquantized
    double correlation = 0.0;
    CRow direction; ///< quantized subvector direction, zero elsewhere

    /// Transmitter-side channel estimate sqrt(gain) * direction.
    CRow estimate() const { return std::sqrt(gain) * direction; }
    double quantization_error() const { return 1.0 - correlation; }
};

/// Spend the whole feedback codebook on the antenna group with the smallest
/// macroscopic pathloss; ties go to the lowest group id.
DasReport das_feedback_allocation(const CRow& row, std::span<const AntennaGroup> groups,
                                  std::span<const double> group_pathloss_db, std::span<const Codebook> codebooks);

enum class Mode { Svd, Clsm, Zf, Pu2rc };

struct PrecodingDecision {
    std::vector<std::size_t> users;
    CMatrix precoder; ///< n_tx x n_streams, unit-norm columns
    std::vector<double> power;
    Mode mode = Mode::Zf;

    double total_power() const;
};

/// Right pseudo-inverse of the stacked rows, columns normalized, equal power.
PrecodingDecision zf_precoder(const CMatrix& rows, double total_power, std::vector<std::size_t> users = {});

enum class CsitMode { Perfect, Quantized };

struct ZfCandidate {
    CRow estimate;                    ///< channel row known at the transmitter
    double noise = 1.0;               ///< noise plus out-of-cell interference
    double quantization_error = 0.0;  ///< 1 - |<h, h_hat>|^2, used in quantized mode
};

/// Estimated ZF sum rate (bits/s/Hz) of serving `set`; 0 for a singular set.
/// Shannon per stream, or the capped rate map when `map` is given.
double zf_sum_rate_estimate(std::span<const ZfCandidate> candidates, std::span<const std::size_t> set,
                            std::size_t n_tx, double total_power, CsitMode mode,
                            const linkmodel::RateMap* map = nullptr);

/// Greedy selection: add the candidate that maximizes the estimated sum rate
/// until n_tx users are served or the estimate stops increasing. Runs from the
/// empty set and from each single seed user, keeps the best, then applies the
/// best single add, drop or swap while one raises the estimate. Deterministic.
std::vector<std::size_t> zf_user_selection(std::span<const ZfCandidate> candidates, std::size_t n_tx,
                                           double total_power, CsitMode mode,
                                           const linkmodel::RateMap* map = nullptr);

/// 2^bits unitary n_tx x n_tx matrices: DFT columns with per-matrix phase rotation.
class UnitaryCodebook {
public:
    explicit UnitaryCodebook(std::vector<CMatrix> matrices);
    static UnitaryCodebook dft_rotated(std::size_t n_tx, int bits);

    std::size_t size() const noexcept { return matrices_.size(); }
    std::size_t n_tx() const noexcept { return static_cast<std::size_t>(matrices_.front().rows()); }
    const CMatrix& matrix(std::size_t i) const { return matrices_[i]; }

private:
    std::vector<CMatrix> matrices_;
};

struct Pu2rcReport {
    std::size_t user = 0;
    std::size_t matrix = 0;
    std::size_t column = 0;
    double sinr = 0.0;
};

/// Preferred (matrix, column) of one user, assuming all columns of the matrix
/// are active with equal power.
Pu2rcReport pu2rc_report(std::size_t user, const CRow& row, double noise, double total_power,
                         const UnitaryCodebook& codebook);

/// 3-bit style CQI: floor to a `step_db` grid starting at `min_db`, `levels` levels.
double quantize_sinr_report(double sinr, double min_db = -10.0, double step_db = 5.0, int levels = 8);

/// Score of serving the best reporter of each column of `matrix`.
double pu2rc_matrix_score(std::span<const Pu2rcReport> reports, std::size_t matrix, std::size_t n_columns,
                          const linkmodel::RateMap& map);

PrecodingDecision pu2rc_transceiver(std::span<const Pu2rcReport> reports, const UnitaryCodebook& codebook,
                                    double total_power, const linkmodel::RateMap& map = {});

/// SINR of each served user on its true channel row (rows ordered like
/// decision.users) against the possibly mismatched precoder.
std::vector<double> mu_sinr(const PrecodingDecision& decision, const CMatrix& true_rows, std::span<const double> noise);

/// Same, but each user applies an MMSE filter over its full n_rx x n_tx
/// channel (ordered like decision.users). Never below mu_sinr on any
/// receive combination of those channels.
std::vector<double> mu_sinr_mmse(const PrecodingDecision& decision, std::span<const CMatrix> channels,
                                 std::span<const double> noise);

} // namespace ltesim::mimo
