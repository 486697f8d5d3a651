#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ltesim/scheduling.hpp"

namespace ltesim::sim {

enum class Experiment { MuGain, Das, Femto, Cfo, PilotPower };

std::string to_string(Experiment e);
/// Accepts the CLI spellings: mu-gain, das, femto, cfo, pilot-power.
Experiment parse_experiment(const std::string& name);

struct AntennaConfig {
    int n_tx = 1;
    int n_rx = 1;

    friend bool operator==(const AntennaConfig&, const AntennaConfig&) = default;
};

/// "2x2" style label.
std::string to_string(AntennaConfig a);
AntennaConfig parse_antenna_config(const std::string& text);

enum class DasMode { SvdPerfect, ClsmQuantized, ZfPerfect, ZfQuantized, Pu2rcQuantized };

std::string to_string(DasMode m);
DasMode parse_das_mode(const std::string& text);

std::string to_string(scheduling::SchedulerKind k);
scheduling::SchedulerKind parse_scheduler(const std::string& text);

struct LayoutParams {
    int rings = 1;
    double isd_m = 500.0;
    double rru_fraction = 2.0 / 3.0;
    double rru_offset_deg = 36.0;
    double cell_power_dbm = 46.0;
};

struct PropagationParams {
    double noise_dbm = -95.0;
    double carrier_hz = 2.0e9;
    double tti_s = 1.0e-3;
    double velocity_kmh = 3.0;
    bool shadowing = true;
    double macro_sigma_db = 8.0;
    double femto_sigma_db = 4.0;
    double wall_loss_db = 10.0;
    double femto_power_dbm = 20.0;
    double rx_correlation = 0.0;
};

struct SchedulerParams {
    std::vector<scheduling::SchedulerKind> kinds{scheduling::SchedulerKind::RoundRobin,
                                                scheduling::SchedulerKind::ProportionalFair,
                                                scheduling::SchedulerKind::BestCqi};
    double window_tti = 100.0;
};

struct MimoParams {
    std::vector<AntennaConfig> antennas{{1, 1}, {2, 2}, {4, 4}};
    /// Precoder codebook bits per rank for closed-loop spatial multiplexing.
    int clsm_bits = 4;
    /// Deduct reference-signal resource elements from mu-gain rates.
    bool rs_overhead = true;
};

struct DasParams {
    std::vector<DasMode> modes{DasMode::SvdPerfect, DasMode::ClsmQuantized, DasMode::ZfPerfect,
                               DasMode::ZfQuantized, DasMode::Pu2rcQuantized};
    int n_tx = 8;
    int n_rx = 4;
    int antennas_bs = 4;
    int antennas_per_rru = 2;
    int feedback_bits = 8;
    int pu2rc_matrix_bits = 2;
    int pu2rc_sinr_bits = 3;
    double sinr_min_db = -10.0;
    double sinr_step_db = 5.0;
    /// Out-of-site interference floor; calibrated against a full grid when unset.
    std::optional<double> floor_dbm;
    int calibration_rings = 2;
    /// MU-MIMO users decode with an MMSE filter over all receive antennas;
    /// false keeps the single combiner used for feedback.
    bool mmse_receiver = true;
};

struct FemtoParams {
    std::size_t n_clusters = 10;
    std::size_t users_per_cluster = 5;
    double cluster_radius_m = 20.0;
};

struct CfoParams {
    std::string preset = "time";
    /// 0 keeps the preset's observation count.
    std::size_t n_obs = 0;
    double c_mse = 0.1;
    std::size_t n_re = 1;
    bool force_zero = false;
};

struct PilotParams {
    double snr_db = 20.0;
    double budget = 1.0;
    double c_noise = 1.0;
    double c_floor = 1e-5;
    double density_base = 1.0;
    /// Exp(1) stream-gain draws averaged per grid point.
    std::size_t gain_draws = 200;
};

struct ExperimentConfig {
    Experiment experiment = Experiment::MuGain;
    std::uint64_t seed = 1;
    std::size_t n_drops = 50;
    std::size_t n_tti = 200;
    std::size_t n_rb = 6;
    double rb_bandwidth_hz = 180e3;

    LayoutParams layout;
    PropagationParams propagation;
    SchedulerParams scheduler;
    MimoParams mimo;
    DasParams das;
    FemtoParams femto;
    CfoParams cfo;
    PilotParams pilot;

    std::string sweep_variable;
    std::vector<double> sweep_values;

    /// Throws ConfigError on the first violated invariant.
    void validate() const;
};

/// Defaults for one experiment, including its sweep variable and grid.
ExperimentConfig default_config(Experiment e);

/// Every accepted "section.key" name.
const std::vector<std::string>& known_keys();

/// INI-style text: [section] headers, key = value lines, ';' or '#' comments.
/// Lists are comma separated. Unknown sections or keys raise ConfigError
/// naming the key. `experiment` selects the defaults when the text does not
/// set run.experiment itself.
ExperimentConfig parse_config(std::istream& in, std::optional<Experiment> experiment = std::nullopt,
                              const std::vector<std::pair<std::string, std::string>>& overrides = {});

ExperimentConfig load_config(const std::string& path, std::optional<Experiment> experiment = std::nullopt,
                             const std::vector<std::pair<std::string, std::string>>& overrides = {});

/// Applies one "section.key" = value assignment.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Splits "section.key=value".
std::pair<std::string, std::string> parse_override(const std::string& text);

} // namespace ltesim::sim
