#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "ltesim/error.hpp"
#include "ltesim/experiments.hpp"
#include "ltesim/metrics.hpp"
#include "ltesim/mimo.hpp"

namespace ltesim::sim {

namespace {

constexpr std::size_t kCells = 3;
constexpr std::array<const char*, 2> kLayoutNames{"centralized", "das"};

struct DasSetup {
    std::array<geometry::NetworkLayout, 2> layouts;
    double floor_w = 0.0;
    std::vector<mimo::Codebook> rvq; // indexed by dimension
    mimo::PrecoderCodebook clsm;
    mimo::UnitaryCodebook pu2rc{std::vector<mimo::CMatrix>{mimo::CMatrix::Identity(1, 1)}};
    linkmodel::RateMap map;
    double area_km2 = 0.0;
};

// [layout][k index][mode] -> sum over cells of mean spectral efficiency, bit/s/Hz
using DasDrop = std::vector<std::vector<std::vector<double>>>;

// Antenna index ranges per transmission point, in channel column order.
std::vector<mimo::AntennaGroup> groups_of(const geometry::Cell& cell)
{
    std::vector<mimo::AntennaGroup> g;
    std::size_t offset = 0;
    for (const auto& tp : cell.tx_points) {
        g.push_back({offset, static_cast<std::size_t>(tp.n_antennas)});
        offset += static_cast<std::size_t>(tp.n_antennas);
    }
    return g;
}

// Sum rate of the served users, decoded either with an MMSE filter on the
// full channel or with the combiner behind the effective rows.
double served_rate(const mimo::PrecodingDecision& decision, const std::vector<mimo::CMatrix>& channels,
                   const std::vector<mimo::EffectiveChannel>& effective, const DasSetup& setup, bool mmse)
{
    const std::vector<double> noise(decision.users.size(), 1.0);
    std::vector<double> sinr;
    if (mmse) {
        std::vector<mimo::CMatrix> served;
        for (std::size_t u : decision.users) served.push_back(channels[u]);
        sinr = mimo::mu_sinr_mmse(decision, served, noise);
    } else {
        mimo::CMatrix rows(static_cast<Eigen::Index>(decision.users.size()), decision.precoder.rows());
        for (std::size_t i = 0; i < decision.users.size(); ++i)
            rows.row(static_cast<Eigen::Index>(i)) = effective[decision.users[i]].row;
        sinr = mimo::mu_sinr(decision, rows, noise);
    }
    double rate = 0.0;
    for (double s : sinr) rate += linkmodel::rate_map(s, setup.map);
    return rate;
}

double mode_rate(DasMode mode, const DasSetup& setup, const std::vector<mimo::CMatrix>& channels,
                 const std::vector<mimo::EffectiveChannel>& effective, const std::vector<mimo::DasReport>& reports,
                 const std::vector<double>& svd_rate, const std::vector<double>& clsm_rate, std::size_t k,
                 std::size_t n_tx, const DasParams& das)
{
    const auto& map = setup.map;
    switch (mode) {
    case DasMode::SvdPerfect:
        return *std::max_element(svd_rate.begin(), svd_rate.begin() + static_cast<std::ptrdiff_t>(k));
    case DasMode::ClsmQuantized:
        return *std::max_element(clsm_rate.begin(), clsm_rate.begin() + static_cast<std::ptrdiff_t>(k));
    case DasMode::ZfPerfect:
    case DasMode::ZfQuantized: {
        const bool perfect = mode == DasMode::ZfPerfect;
        std::vector<mimo::ZfCandidate> cand;
        for (std::size_t u = 0; u < k; ++u) {
            if (perfect)
                cand.push_back({effective[u].row, 1.0, 0.0});
            else
                cand.push_back({reports[u].estimate(), 1.0, reports[u].quantization_error()});
        }
        const auto served = mimo::zf_user_selection(cand, n_tx, 1.0,
                                                    perfect ? mimo::CsitMode::Perfect : mimo::CsitMode::Quantized, &map);
        if (served.empty()) return 0.0;
        mimo::CMatrix est(static_cast<Eigen::Index>(served.size()), static_cast<Eigen::Index>(n_tx));
        for (std::size_t i = 0; i < served.size(); ++i) est.row(static_cast<Eigen::Index>(i)) = cand[served[i]].estimate;
        return served_rate(mimo::zf_precoder(est, 1.0, served), channels, effective, setup, das.mmse_receiver);
    }
    case DasMode::Pu2rcQuantized: {
        std::vector<mimo::Pu2rcReport> rep;
        const int levels = 1 << das.pu2rc_sinr_bits;
        for (std::size_t u = 0; u < k; ++u) {
            auto r = mimo::pu2rc_report(u, effective[u].row, 1.0, 1.0, setup.pu2rc);
            r.sinr = mimo::quantize_sinr_report(r.sinr, das.sinr_min_db, das.sinr_step_db, levels);
            rep.push_back(r);
        }
        const auto decision = mimo::pu2rc_transceiver(rep, setup.pu2rc, 1.0, map);
        if (decision.users.empty()) return 0.0;
        return served_rate(decision, channels, effective, setup, das.mmse_receiver);
    }
    }
    return 0.0;
}

DasDrop simulate_drop(const ExperimentConfig& config, const DasSetup& setup, const std::vector<std::size_t>& ks,
                      std::size_t d)
{
    const auto prop = propagation_config(config);
    const std::size_t k_max = ks.back();
    const auto n_tx = static_cast<std::size_t>(config.das.n_tx);
    const auto n_rx = static_cast<std::size_t>(config.das.n_rx);
    const auto& modes = config.das.modes;

    // Users: k_max per cell, cell by cell, so smaller k are prefixes.
    RngStream geo = RngStream::derive(config.seed, d, StreamPurpose::Geometry);
    std::vector<std::vector<geometry::User>> users(kCells);
    for (std::size_t c = 0; c < kCells; ++c)
        users[c] = geometry::drop_users_in(setup.layouts[0].cells[c].footprint, k_max, geo).users;

    // Shadowing shared by both layouts: one draw per (user, site), then one per (user, RRU).
    RngStream shadow = RngStream::derive(config.seed, d, StreamPurpose::Shadowing);
    std::vector<std::vector<std::array<double, 1 + 2 * kCells>>> sh(kCells);
    for (std::size_t c = 0; c < kCells; ++c)
        for (std::size_t u = 0; u < k_max; ++u) {
            std::array<double, 1 + 2 * kCells> draws{};
            for (double& s : draws) s = prop.shadowing_enabled ? propagation::shadowing_sample(shadow, propagation::LinkKind::Macro, prop.shadowing) : 0.0;
            sh[c].push_back(draws);
        }

    DasDrop out(2, std::vector<std::vector<double>>(ks.size(), std::vector<double>(modes.size(), 0.0)));
    for (std::size_t l = 0; l < 2; ++l) {
        const geometry::NetworkLayout& layout = setup.layouts[l];
        for (std::size_t c = 0; c < kCells; ++c) {
            const geometry::Cell& cell = layout.cells[c];
            const auto groups = groups_of(cell);
            std::vector<double> own_pl(cell.tx_points.size());
            std::vector<std::vector<double>> col_scale(k_max);
            std::vector<std::vector<double>> group_loss(k_max);

            for (std::size_t u = 0; u < k_max; ++u) {
                const geometry::User& user = users[c][u];
                double interference = 0.0;
                for (std::size_t oc = 0; oc < kCells; ++oc) {
                    const auto& ocell = layout.cells[oc];
                    for (std::size_t t = 0; t < ocell.tx_points.size(); ++t) {
                        const double s = t == 0 ? sh[c][u][0] : sh[c][u][1 + 2 * oc + (t - 1)];
                        const auto link = propagation::evaluate_link(user, ocell.tx_points[t], prop, s);
                        if (oc == c) {
                            const double p_ant = link.rx_power_w() / static_cast<double>(ocell.tx_points[t].n_antennas);
                            for (int a = 0; a < ocell.tx_points[t].n_antennas; ++a) col_scale[u].push_back(p_ant);
                            group_loss[u].push_back(link.total_loss_db());
                        } else {
                            interference += link.rx_power_w();
                        }
                    }
                }
                // Column j carries sqrt(P_cell * L_j / noise): total precoder power 1, unit noise.
                const double noise = prop.noise_power_w + setup.floor_w + interference;
                for (double& v : col_scale[u]) v = std::sqrt(v * static_cast<double>(n_tx) / noise);
            }

            std::vector<std::vector<double>> sum_rate(ks.size(), std::vector<double>(modes.size(), 0.0));
            for (std::size_t rb = 0; rb < config.n_rb; ++rb) {
                std::vector<mimo::CMatrix> channels(k_max);
                std::vector<mimo::EffectiveChannel> effective(k_max);
                std::vector<mimo::DasReport> reports(k_max);
                std::vector<double> svd_rate(k_max, 0.0);
                std::vector<double> clsm_rate(k_max, 0.0);
                const bool need_svd = std::find(modes.begin(), modes.end(), DasMode::SvdPerfect) != modes.end();
                const bool need_clsm = std::find(modes.begin(), modes.end(), DasMode::ClsmQuantized) != modes.end();
                const bool need_report = std::find(modes.begin(), modes.end(), DasMode::ZfQuantized) != modes.end();

                for (std::size_t u = 0; u < k_max; ++u) {
                    // Small-scale fading shared by both layouts (same user, same RB).
                    RngStream fr = RngStream::derive(config.seed, d, StreamPurpose::Fading, (c * k_max + u) * 4096 + rb);
                    const auto trace = propagation::generate_fading(1, 1, n_rx, n_tx, 0.0, fr, config.propagation.rx_correlation);
                    mimo::CMatrix h = trace.at(0, 0);
                    for (std::size_t j = 0; j < n_tx; ++j) h.col(static_cast<Eigen::Index>(j)) *= col_scale[u][j];
                    effective[u] = mimo::receive_combining(h);
                    channels[u] = h;
                    if (need_svd) {
                        const auto su = mimo::su_svd_transceiver(h, 1.0);
                        for (double s : su.stream_sinr) svd_rate[u] += linkmodel::rate_map(s, setup.map);
                    }
                    if (need_clsm) clsm_rate[u] = mimo::clsm_transceiver(h, setup.clsm, 1.0, &setup.map).rate;
                    if (need_report) {
                        std::vector<mimo::Codebook> books;
                        for (const auto& g : groups) books.push_back(setup.rvq.at(g.size));
                        reports[u] = mimo::das_feedback_allocation(effective[u].row, groups, group_loss[u], books);
                    }
                }
                for (std::size_t ki = 0; ki < ks.size(); ++ki)
                    for (std::size_t m = 0; m < modes.size(); ++m)
                        sum_rate[ki][m] += mode_rate(modes[m], setup, channels, effective, reports, svd_rate, clsm_rate,
                                                     ks[ki], n_tx, config.das);
            }
            for (std::size_t ki = 0; ki < ks.size(); ++ki)
                for (std::size_t m = 0; m < modes.size(); ++m)
                    out[l][ki][m] += sum_rate[ki][m] / static_cast<double>(config.n_rb);
        }
    }
    return out;
}

} // namespace

ResultTable run_das(const ExperimentConfig& config)
{
    config.validate();
    const DasParams& das = config.das;
    if (das.n_tx != das.antennas_bs + 2 * das.antennas_per_rru)
        throw ConfigError("das antenna split must cover all transmit antennas");

    std::vector<std::size_t> ks;
    for (double v : config.sweep_values) ks.push_back(static_cast<std::size_t>(v));

    DasSetup setup;
    geometry::HexGridOptions central;
    central.antennas_per_cell = das.n_tx;
    central.cell_power_w = propagation::dbm_to_watt(config.layout.cell_power_dbm);
    central.rru_fraction = config.layout.rru_fraction;
    central.rru_offset_deg = config.layout.rru_offset_deg;
    geometry::HexGridOptions distributed = central;
    distributed.rrus_per_cell = 2;
    distributed.antennas_per_rru = das.antennas_per_rru;
    setup.layouts[0] = geometry::build_hex_grid(0, config.layout.isd_m, central);
    setup.layouts[1] = geometry::build_hex_grid(0, config.layout.isd_m, distributed);
    for (std::size_t c = 0; c < kCells; ++c) setup.area_km2 += setup.layouts[0].cells[c].footprint.area() / 1e6;

    const auto prop = propagation_config(config);
    FloorCalibration cal;
    if (das.floor_dbm) {
        setup.floor_w = propagation::dbm_to_watt(*das.floor_dbm);
    } else {
        cal = calibrate_interference_floor(config.layout.isd_m, das.calibration_rings, central, prop);
        setup.floor_w = cal.floor_w;
    }

    const std::uint64_t run_stream = std::numeric_limits<std::uint64_t>::max();
    const auto n_tx = static_cast<std::size_t>(das.n_tx);
    setup.rvq.resize(n_tx + 1, mimo::Codebook({mimo::CVector::Ones(1)}, 0));
    for (std::size_t dim : {static_cast<std::size_t>(das.antennas_bs), static_cast<std::size_t>(das.antennas_per_rru), n_tx}) {
        RngStream cb = RngStream::derive(config.seed, run_stream, StreamPurpose::Codebook, dim);
        setup.rvq[dim] = mimo::Codebook::random(dim, das.feedback_bits, cb);
    }
    // CLSM: rank indicator plus per-rank precoder index within the same feedback budget.
    const std::size_t max_rank = std::min<std::size_t>(n_tx, static_cast<std::size_t>(das.n_rx));
    int rank_bits = 0;
    while ((std::size_t{1} << rank_bits) < max_rank) ++rank_bits;
    {
        RngStream cb = RngStream::derive(config.seed, run_stream, StreamPurpose::Codebook, 1000 + n_tx);
        setup.clsm = mimo::PrecoderCodebook::random(n_tx, max_rank, std::max(0, das.feedback_bits - rank_bits), cb);
    }
    setup.pu2rc = mimo::UnitaryCodebook::dft_rotated(n_tx, das.pu2rc_matrix_bits);

    const auto drops = run_drops(config.n_drops, [&](std::size_t d) { return simulate_drop(config, setup, ks, d); });

    ResultTable table(to_string(config.experiment), config.sweep_variable);
    const auto& modes = config.das.modes;
    const auto samples = [&](std::size_t l, std::size_t ki, std::size_t m) {
        std::vector<double> v;
        for (const auto& drop : drops) v.push_back(drop[l][ki][m] / setup.area_km2);
        return v;
    };
    const auto index_of = [&](DasMode mode) -> std::ptrdiff_t {
        const auto it = std::find(modes.begin(), modes.end(), mode);
        return it == modes.end() ? -1 : it - modes.begin();
    };
    const auto diff = [](std::vector<double> a, const std::vector<double>& b) {
        for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
        return a;
    };

    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
        const double k = static_cast<double>(ks[ki]);
        for (std::size_t l = 0; l < 2; ++l)
            for (std::size_t m = 0; m < modes.size(); ++m)
                table.add(k, "ase." + to_string(modes[m]) + "." + kLayoutNames[l], samples(l, ki, m));

        const auto zfp = index_of(DasMode::ZfPerfect);
        const auto svd = index_of(DasMode::SvdPerfect);
        const auto zfq = index_of(DasMode::ZfQuantized);
        const auto pu2 = index_of(DasMode::Pu2rcQuantized);
        if (zfp >= 0 && svd >= 0)
            for (std::size_t l = 0; l < 2; ++l)
                table.add(k, std::string("diff.zf-perfect_minus_svd-perfect.") + kLayoutNames[l],
                          diff(samples(l, ki, static_cast<std::size_t>(zfp)), samples(l, ki, static_cast<std::size_t>(svd))));
        if (zfq >= 0)
            table.add(k, "diff.zf-quantized.das_minus_centralized",
                      diff(samples(1, ki, static_cast<std::size_t>(zfq)), samples(0, ki, static_cast<std::size_t>(zfq))));
        if (zfq >= 0 && pu2 >= 0)
            table.add(k, "diff.zf-quantized_minus_pu2rc-quantized.das",
                      diff(samples(1, ki, static_cast<std::size_t>(zfq)), samples(1, ki, static_cast<std::size_t>(pu2))));
    }

    table.add({0.0, "floor_dbm", propagation::watt_to_dbm(setup.floor_w), 0.0, 1});
    if (!das.floor_dbm) {
        table.add({0.0, "floor_geometry_err_db", cal.geometry_error_db, 0.0, cal.n_points});
        table.add({0.0, "floor_err_mean_db", cal.mean_abs_error_db, 0.0, cal.n_points});
        table.add({0.0, "floor_err_max_db", cal.max_abs_error_db, 0.0, cal.n_points});
    }
    return table;
}

} // namespace ltesim::sim
