#include "ltesim/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>

#include "ltesim/error.hpp"

namespace ltesim::propagation {

double pathloss_db(double distance_m, LinkKind kind, const PathlossModel& model)
{
    if (!(distance_m > 0.0)) throw InvalidParameter("pathloss distance must be positive");
    const double d_km = std::max(distance_m, model.min_distance_m) / 1000.0;
    if (kind == LinkKind::Macro) return model.macro_intercept_db + model.macro_slope_db * std::log10(d_km);
    return model.femto_intercept_db + model.femto_slope_db * std::log10(d_km) + model.wall_loss_db;
}

double shadowing_sample(RngStream& rng, LinkKind kind, const ShadowingModel& model)
{
    return rng.normal(0.0, kind == LinkKind::Macro ? model.macro_sigma_db : model.femto_sigma_db);
}

double antenna_gain_db(double off_boresight_deg, const SectorPattern& pattern)
{
    double theta = std::fmod(off_boresight_deg, 360.0);
    if (theta > 180.0) theta -= 360.0;
    if (theta < -180.0) theta += 360.0;
    const double ratio = theta / pattern.beamwidth_deg;
    return -std::min(12.0 * ratio * ratio, pattern.front_to_back_db);
}

double doppler_frequency(double velocity_kmh, double carrier_hz)
{
    return velocity_kmh / 3.6 * carrier_hz / kSpeedOfLight;
}

double doppler_correlation(double velocity_kmh, double carrier_hz, double tti_s)
{
    if (velocity_kmh < 0.0) throw InvalidParameter("velocity must be >= 0");
    const double arg = 2.0 * std::numbers::pi * doppler_frequency(velocity_kmh, carrier_hz) * tti_s;
    // Past the first zero of J0 the correlation is treated as gone.
    constexpr double kFirstZero = 2.404825557695773;
    if (arg >= kFirstZero) return 0.0;
    return std::clamp(std::cyl_bessel_j(0.0, arg), 0.0, 1.0);
}

FadingTrace::FadingTrace(std::size_t n_tti, std::size_t n_rb, std::size_t n_rx, std::size_t n_tx, double rho)
    : n_tti_(n_tti), n_rb_(n_rb), n_rx_(n_rx), n_tx_(n_tx), rho_(rho),
      blocks_(n_tti * n_rb, CMatrix::Zero(static_cast<Eigen::Index>(n_rx), static_cast<Eigen::Index>(n_tx)))
{
}

FadingTrace generate_fading(std::size_t n_tti, std::size_t n_rb, std::size_t n_rx, std::size_t n_tx, double rho,
                            RngStream& rng, double rx_correlation)
{
    if (n_tti == 0 || n_rb == 0 || n_rx == 0 || n_tx == 0) throw InvalidParameter("fading dimensions must be >= 1");
    if (!(rho >= 0.0 && rho <= 1.0)) throw InvalidParameter("fading correlation must lie in [0, 1]");
    if (!(rx_correlation >= 0.0 && rx_correlation < 1.0))
        throw InvalidParameter("receive correlation must lie in [0, 1)");

    FadingTrace trace(n_tti, n_rb, n_rx, n_tx, rho);
    const double innovation = std::sqrt(1.0 - rho * rho);
    const auto rows = static_cast<Eigen::Index>(n_rx);
    const auto cols = static_cast<Eigen::Index>(n_tx);

    // i.i.d. processes first; receive correlation is a fixed linear map on top.
    for (std::size_t rb = 0; rb < n_rb; ++rb) {
        CMatrix& first = trace.at(0, rb);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i) first(i, j) = rng.complex_normal();
        for (std::size_t t = 1; t < n_tti; ++t) {
            const CMatrix& prev = trace.at(t - 1, rb);
            CMatrix& cur = trace.at(t, rb);
            for (Eigen::Index j = 0; j < cols; ++j)
                for (Eigen::Index i = 0; i < rows; ++i)
                    cur(i, j) = rho * prev(i, j) + innovation * rng.complex_normal();
        }
    }

    if (rx_correlation > 0.0 && n_rx > 1) {
        Eigen::MatrixXd corr(rows, rows);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < rows; ++j)
                corr(i, j) = std::pow(rx_correlation, static_cast<double>(std::abs(i - j)));
        const CMatrix lower = Eigen::LLT<Eigen::MatrixXd>(corr).matrixL().toDenseMatrix().cast<std::complex<double>>();
        for (std::size_t t = 0; t < n_tti; ++t)
            for (std::size_t rb = 0; rb < n_rb; ++rb) trace.at(t, rb) = lower * trace.at(t, rb);
    }
    return trace;
}

double linear_to_db(double linear)
{
    return 10.0 * std::log10(linear);
}

double watt_to_dbm(double watt)
{
    return 10.0 * std::log10(watt) + 30.0;
}

double wideband_snr(double tx_power_w, double total_loss_db, double noise_power_w)
{
    return tx_power_w * db_to_linear(-total_loss_db) / noise_power_w;
}

double LinkState::rx_power_w() const
{
    return tx_power_w * db_to_linear(-total_loss_db());
}

LinkKind link_kind(const geometry::TransmissionPoint& tp)
{
    return tp.kind == geometry::TxKind::Femto ? LinkKind::Femto : LinkKind::Macro;
}

LinkState evaluate_link(const geometry::User& user, const geometry::TransmissionPoint& tp,
                        const PropagationConfig& config, double shadowing_db)
{
    LinkState link;
    link.user_id = user.id;
    link.tx_point_id = tp.id;
    const double d = std::max(geometry::distance(user.position, tp.position), 1e-3);
    link.pathloss_db = pathloss_db(d, link_kind(tp), config.pathloss);
    link.shadowing_db = shadowing_db;
    if (tp.directional) {
        const geometry::Point v = user.position - tp.position;
        const double azimuth = std::atan2(v.y, v.x) * 180.0 / std::numbers::pi;
        link.antenna_gain_db = antenna_gain_db(azimuth - tp.boresight_deg, config.pattern);
    }
    link.tx_power_w = tp.tx_power_w;
    link.wideband_snr = wideband_snr(tp.tx_power_w, link.total_loss_db(), config.noise_power_w);
    return link;
}

namespace {

const geometry::TransmissionPoint* find_tx_point(const geometry::NetworkLayout& layout, int id)
{
    for (const auto& cell : layout.cells)
        for (const auto& tp : cell.tx_points)
            if (tp.id == id) return &tp;
    for (const auto& f : layout.femtos)
        if (f.tx.id == id) return &f.tx;
    return nullptr;
}

} // namespace

double wideband_snr(const geometry::NetworkLayout& layout, const geometry::User& user, int tx_point_id,
                    double shadowing_db, const PropagationConfig& config)
{
    const auto* tp = find_tx_point(layout, tx_point_id);
    if (tp == nullptr) throw InvalidParameter("unknown transmission point id");
    return evaluate_link(user, *tp, config, shadowing_db).wideband_snr;
}

LinkTable::LinkTable(const geometry::NetworkLayout& layout, const geometry::UserDrop& drop,
                     const PropagationConfig& config, RngStream& rng)
    : n_users_(drop.users.size())
{
    std::vector<const geometry::TransmissionPoint*> points;
    for (std::size_t c = 0; c < layout.cells.size(); ++c)
        for (const auto& tp : layout.cells[c].tx_points) {
            points.push_back(&tp);
            tp_owner_.push_back(c);
        }
    for (std::size_t f = 0; f < layout.femtos.size(); ++f) {
        points.push_back(&layout.femtos[f].tx);
        tp_owner_.push_back(layout.cells.size() + f);
    }

    links_.reserve(n_users_ * points.size());
    for (const auto& user : drop.users) {
        for (const auto* tp : points) {
            const double sh =
                config.shadowing_enabled ? shadowing_sample(rng, link_kind(*tp), config.shadowing) : 0.0;
            links_.push_back(evaluate_link(user, *tp, config, sh));
        }
    }
}

geometry::ServerPowerMatrix LinkTable::server_power() const
{
    std::size_t n_servers = 0;
    for (auto o : tp_owner_) n_servers = std::max(n_servers, o + 1);
    geometry::ServerPowerMatrix out =
        geometry::ServerPowerMatrix::Zero(static_cast<Eigen::Index>(n_users_), static_cast<Eigen::Index>(n_servers));
    for (std::size_t u = 0; u < n_users_; ++u)
        for (std::size_t t = 0; t < n_tx_points(); ++t)
            out(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(tp_owner_[t])) += link(u, t).rx_power_w();
    return out;
}

} // namespace ltesim::propagation
