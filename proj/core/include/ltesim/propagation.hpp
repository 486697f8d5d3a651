#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "ltesim/geometry.hpp"
#include "ltesim/rng.hpp"

namespace ltesim::propagation {

using CMatrix = Eigen::MatrixXcd;

enum class LinkKind { Macro, Femto };

struct PathlossModel {
    double macro_intercept_db = 128.1;
    double macro_slope_db = 37.6;
    double femto_intercept_db = 127.0;
    double femto_slope_db = 30.0;
    double wall_loss_db = 10.0;
    double min_distance_m = 10.0;
};

/// Distance-dependent pathloss in dB; distances below the floor are clamped.
double pathloss_db(double distance_m, LinkKind kind, const PathlossModel& model = {});

struct ShadowingModel {
    double macro_sigma_db = 8.0;
    double femto_sigma_db = 4.0;
};

/// Log-normal shadowing draw in dB, zero mean.
double shadowing_sample(RngStream& rng, LinkKind kind = LinkKind::Macro, const ShadowingModel& model = {});

/// Sector antenna: -min(12 (theta/theta_3dB)^2, front_to_back) dB.
struct SectorPattern {
    double beamwidth_deg = 70.0;
    double front_to_back_db = 20.0;
};

double antenna_gain_db(double off_boresight_deg, const SectorPattern& pattern = {});

inline constexpr double kSpeedOfLight = 299792458.0;

/// Maximum Doppler shift in Hz.
double doppler_frequency(double velocity_kmh, double carrier_hz);

/// Clarke/Jakes lag-one correlation J0(2 pi f_d T), clipped to [0, 1].
double doppler_correlation(double velocity_kmh, double carrier_hz, double tti_s);

/// Block-fading channel: one n_rx x n_tx matrix per (TTI, resource block),
/// entries evolving as a first-order autoregressive process in time.
class FadingTrace {
public:
    FadingTrace(std::size_t n_tti, std::size_t n_rb, std::size_t n_rx, std::size_t n_tx, double rho);

    std::size_t n_tti() const noexcept { return n_tti_; }
    std::size_t n_rb() const noexcept { return n_rb_; }
    std::size_t n_rx() const noexcept { return n_rx_; }
    std::size_t n_tx() const noexcept { return n_tx_; }
    double rho() const noexcept { return rho_; }

    const CMatrix& at(std::size_t tti, std::size_t rb) const { return blocks_[tti * n_rb_ + rb]; }
    CMatrix& at(std::size_t tti, std::size_t rb) { return blocks_[tti * n_rb_ + rb]; }

private:
    std::size_t n_tti_;
    std::size_t n_rb_;
    std::size_t n_rx_;
    std::size_t n_tx_;
    double rho_;
    std::vector<CMatrix> blocks_;
};

/// `rx_correlation` applies an exponential receive correlation
/// R_ij = r^|i-j| (0 gives i.i.d. entries); per-entry power stays 1.
FadingTrace generate_fading(std::size_t n_tti, std::size_t n_rb, std::size_t n_rx, std::size_t n_tx, double rho,
                            RngStream& rng, double rx_correlation = 0.0);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear);
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watt_to_dbm(double watt);

/// tx_power * 10^(-(loss)/10) / noise, with `total_loss_db` = PL + SH - antenna gain.
double wideband_snr(double tx_power_w, double total_loss_db, double noise_power_w);

struct LinkState {
    int user_id = 0;
    int tx_point_id = 0;
    double pathloss_db = 0.0;
    double shadowing_db = 0.0;
    double antenna_gain_db = 0.0;
    double tx_power_w = 0.0;
    double wideband_snr = 0.0;

    double total_loss_db() const { return pathloss_db + shadowing_db - antenna_gain_db; }
    /// Average received power in W (no fast fading).
    double rx_power_w() const;
};

struct PropagationConfig {
    PathlossModel pathloss;
    ShadowingModel shadowing;
    SectorPattern pattern;
    double noise_power_w = 3.1622776601683795e-13; // -95 dBm
    bool shadowing_enabled = true;
};

LinkKind link_kind(const geometry::TransmissionPoint& tp);

/// Deterministic part of a link (no shadowing draw).
LinkState evaluate_link(const geometry::User& user, const geometry::TransmissionPoint& tp,
                        const PropagationConfig& config, double shadowing_db = 0.0);

/// Same as the LinkState stored SNR; recomputed from the layout.
double wideband_snr(const geometry::NetworkLayout& layout, const geometry::User& user, int tx_point_id,
                    double shadowing_db, const PropagationConfig& config);

/// Links of every user to every transmission point of the layout (cells in
/// id order, then femtos). Shadowing is drawn i.i.d. per link from `rng` in
/// (user, tx point) order.
class LinkTable {
public:
    LinkTable(const geometry::NetworkLayout& layout, const geometry::UserDrop& drop, const PropagationConfig& config,
              RngStream& rng);

    std::size_t n_users() const noexcept { return n_users_; }
    std::size_t n_tx_points() const noexcept { return tp_owner_.size(); }
    const LinkState& link(std::size_t user, std::size_t tx_point) const { return links_[user * n_tx_points() + tx_point]; }

    /// Server index (cells, then femtos) owning each transmission point.
    std::size_t owner(std::size_t tx_point) const { return tp_owner_[tx_point]; }

    /// Average received power per (user, server), summed over the server's points.
    geometry::ServerPowerMatrix server_power() const;

private:
    std::size_t n_users_ = 0;
    std::vector<std::size_t> tp_owner_;
    std::vector<LinkState> links_;
};

} // namespace ltesim::propagation
