#include "ltesim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "ltesim/error.hpp"

namespace ltesim::sim {

namespace {

std::string trim(const std::string& s)
{
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

double to_double(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(v))
        throw ConfigError(key + ": expected a number, got '" + text + "'");
    return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
        throw ConfigError(key + ": expected a non-negative integer, got '" + text + "'");
    return v;
}

std::size_t to_size(const std::string& key, const std::string& text)
{
    return static_cast<std::size_t>(to_u64(key, text));
}

int to_int(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
        throw ConfigError(key + ": expected an integer, got '" + text + "'");
    return v;
}

bool to_bool(const std::string& key, const std::string& text)
{
    const std::string t = lower(trim(text));
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ConfigError(key + ": expected a boolean, got '" + text + "'");
}

std::vector<std::string> split_list(const std::string& key, const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError(key + ": empty list element");
        out.push_back(item);
    }
    if (out.empty()) throw ConfigError(key + ": list must not be empty");
    return out;
}

template <typename T, typename F>
std::vector<T> map_list(const std::string& key, const std::string& text, F convert)
{
    std::vector<T> out;
    for (const auto& item : split_list(key, text)) out.push_back(convert(item));
    return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        t["run.experiment"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            try {
                if (parse_experiment(trim(v)) != c.experiment)
                    throw ConfigError(k + ": '" + trim(v) + "' conflicts with the selected experiment " +
                                      to_string(c.experiment));
            } catch (const InvalidParameter& e) {
                throw ConfigError(k + ": " + e.what());
            }
        };
        t["run.seed"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.seed = to_u64(k, v); };
        t["run.n_drops"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.n_drops = to_size(k, v); };
        t["run.n_tti"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.n_tti = to_size(k, v); };
        t["run.n_rb"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.n_rb = to_size(k, v); };
        t["run.rb_bandwidth_hz"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.rb_bandwidth_hz = to_double(k, v);
        };

        t["layout.rings"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.layout.rings = to_int(k, v); };
        t["layout.isd_m"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.layout.isd_m = to_double(k, v); };
        t["layout.rru_fraction"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.layout.rru_fraction = to_double(k, v);
        };
        t["layout.rru_offset_deg"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.layout.rru_offset_deg = to_double(k, v);
        };
        t["layout.cell_power_dbm"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.layout.cell_power_dbm = to_double(k, v);
        };

        t["propagation.noise_dbm"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.propagation.noise_dbm = to_double(k, v);
        };
        t["propagation.carrier_hz"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.propagation.carrier_hz = to_double(k, v);
        };
        t["propagation.tti_s"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.propagation.tti_s = to_double(k, v);
        };
        t["propagation.velocity_kmh"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.propagation.velocity_kmh = to_double(k, v);
        };
        t["propagation.shadowing"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.propagation.shadowing = to_bool(k, v);
        };
        t["propagation.macro_sigma_db"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.propagation.macro_sigma_db = to_double(k, v);
        };
        t["propagation.femto_sigma_db"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.propagation.femto_sigma_db = to_double(k, v);
        };
        t["propagation.wall_loss_db"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.propagation.wall_loss_db = to_double(k, v);
        };
        t["propagation.femto_power_dbm"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.propagation.femto_power_dbm = to_double(k, v);
        };
        t["propagation.rx_correlation"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.propagation.rx_correlation = to_double(k, v);
        };

        t["scheduler.kinds"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.scheduler.kinds = map_list<scheduling::SchedulerKind>(k, v, [&](const std::string& s) {
                try {
                    return parse_scheduler(s);
                } catch (const InvalidParameter& e) {
                    throw ConfigError(k + ": " + e.what());
                }
            });
        };
        t["scheduler.window_tti"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.scheduler.window_tti = to_double(k, v);
        };

        t["mimo.antennas"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.mimo.antennas = map_list<AntennaConfig>(k, v, [&](const std::string& s) {
                try {
                    return parse_antenna_config(s);
                } catch (const InvalidParameter& e) {
                    throw ConfigError(k + ": " + e.what());
                }
            });
        };
        t["mimo.clsm_bits"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.mimo.clsm_bits = to_int(k, v);
        };
        t["mimo.rs_overhead"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.mimo.rs_overhead = to_bool(k, v);
        };

        t["das.modes"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.das.modes = map_list<DasMode>(k, v, [&](const std::string& s) {
                try {
                    return parse_das_mode(s);
                } catch (const InvalidParameter& e) {
                    throw ConfigError(k + ": " + e.what());
                }
            });
        };
        t["das.n_rx"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.das.n_rx = to_int(k, v); };
        t["das.feedback_bits"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.das.feedback_bits = to_int(k, v);
        };
        t["das.pu2rc_matrix_bits"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.das.pu2rc_matrix_bits = to_int(k, v);
        };
        t["das.pu2rc_sinr_bits"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.das.pu2rc_sinr_bits = to_int(k, v);
        };
        t["das.sinr_min_db"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.das.sinr_min_db = to_double(k, v);
        };
        t["das.sinr_step_db"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.das.sinr_step_db = to_double(k, v);
        };
        t["das.floor_dbm"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            if (lower(trim(v)) == "auto")
                c.das.floor_dbm.reset();
            else
                c.das.floor_dbm = to_double(k, v);
        };
        t["das.calibration_rings"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.das.calibration_rings = to_int(k, v);
        };
        t["das.mmse_receiver"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.das.mmse_receiver = to_bool(k, v);
        };

        t["femto.n_clusters"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.femto.n_clusters = to_size(k, v);
        };
        t["femto.users_per_cluster"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.femto.users_per_cluster = to_size(k, v);
        };
        t["femto.cluster_radius_m"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.femto.cluster_radius_m = to_double(k, v);
        };

        t["cfo.preset"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            const std::string p = lower(trim(v));
            if (p != "time" && p != "frequency") throw ConfigError(k + ": expected 'time' or 'frequency', got '" + v + "'");
            c.cfo.preset = p;
        };
        t["cfo.n_obs"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.cfo.n_obs = to_size(k, v); };
        t["cfo.c_mse"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.cfo.c_mse = to_double(k, v); };
        t["cfo.n_re"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.cfo.n_re = to_size(k, v); };
        t["cfo.force_zero"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.cfo.force_zero = to_bool(k, v);
        };

        t["pilot.snr_db"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.pilot.snr_db = to_double(k, v); };
        t["pilot.budget"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.pilot.budget = to_double(k, v); };
        t["pilot.c_noise"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.pilot.c_noise = to_double(k, v);
        };
        t["pilot.c_floor"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.pilot.c_floor = to_double(k, v);
        };
        t["pilot.density_base"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.pilot.density_base = to_double(k, v);
        };
        t["pilot.gain_draws"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.pilot.gain_draws = to_size(k, v);
        };

        t["sweep.variable"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            if (trim(v) != c.sweep_variable)
                throw ConfigError(k + ": experiment " + to_string(c.experiment) + " sweeps '" + c.sweep_variable +
                                  "', not '" + trim(v) + "'");
        };
        t["sweep.values"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.sweep_values = map_list<double>(k, v, [&](const std::string& s) { return to_double(k, s); });
        };
        return t;
    }();
    return table;
}

void require(bool ok, const std::string& message)
{
    if (!ok) throw ConfigError(message);
}

bool is_integral(double v) { return std::floor(v) == v; }

} // namespace

std::string to_string(Experiment e)
{
    switch (e) {
    case Experiment::MuGain: return "mu-gain";
    case Experiment::Das: return "das";
    case Experiment::Femto: return "femto";
    case Experiment::Cfo: return "cfo";
    case Experiment::PilotPower: return "pilot-power";
    }
    return "unknown";
}

Experiment parse_experiment(const std::string& name)
{
    for (Experiment e : {Experiment::MuGain, Experiment::Das, Experiment::Femto, Experiment::Cfo, Experiment::PilotPower})
        if (to_string(e) == name) return e;
    throw InvalidParameter("unknown experiment '" + name + "'");
}

std::string to_string(AntennaConfig a) { return std::to_string(a.n_tx) + "x" + std::to_string(a.n_rx); }

AntennaConfig parse_antenna_config(const std::string& text)
{
    const std::string t = lower(trim(text));
    const auto x = t.find('x');
    if (x == std::string::npos) throw InvalidParameter("antenna config must look like 2x2, got '" + text + "'");
    AntennaConfig a;
    const auto r1 = std::from_chars(t.data(), t.data() + x, a.n_tx);
    const auto r2 = std::from_chars(t.data() + x + 1, t.data() + t.size(), a.n_rx);
    if (r1.ec != std::errc{} || r1.ptr != t.data() + x || r2.ec != std::errc{} || r2.ptr != t.data() + t.size() ||
        a.n_tx < 1 || a.n_rx < 1)
        throw InvalidParameter("antenna config must look like 2x2, got '" + text + "'");
    return a;
}

std::string to_string(DasMode m)
{
    switch (m) {
    case DasMode::SvdPerfect: return "svd-perfect";
    case DasMode::ClsmQuantized: return "clsm-quantized";
    case DasMode::ZfPerfect: return "zf-perfect";
    case DasMode::ZfQuantized: return "zf-quantized";
    case DasMode::Pu2rcQuantized: return "pu2rc-quantized";
    }
    return "unknown";
}

DasMode parse_das_mode(const std::string& text)
{
    for (DasMode m : {DasMode::SvdPerfect, DasMode::ClsmQuantized, DasMode::ZfPerfect, DasMode::ZfQuantized,
                      DasMode::Pu2rcQuantized})
        if (to_string(m) == text) return m;
    throw InvalidParameter("unknown transmission mode '" + text + "'");
}

std::string to_string(scheduling::SchedulerKind k)
{
    switch (k) {
    case scheduling::SchedulerKind::RoundRobin: return "rr";
    case scheduling::SchedulerKind::ProportionalFair: return "pf";
    case scheduling::SchedulerKind::BestCqi: return "best-cqi";
    }
    return "unknown";
}

scheduling::SchedulerKind parse_scheduler(const std::string& text)
{
    for (auto k : {scheduling::SchedulerKind::RoundRobin, scheduling::SchedulerKind::ProportionalFair,
                   scheduling::SchedulerKind::BestCqi})
        if (to_string(k) == text) return k;
    throw InvalidParameter("unknown scheduler '" + text + "'");
}

ExperimentConfig default_config(Experiment e)
{
    ExperimentConfig c;
    c.experiment = e;
    switch (e) {
    case Experiment::MuGain:
        c.sweep_variable = "k";
        c.sweep_values = {2, 5, 10, 20, 40, 64};
        break;
    case Experiment::Das:
        c.sweep_variable = "users_per_cell";
        c.sweep_values = {2, 4, 8, 12};
        c.layout.rings = 0;
        c.n_tti = 1;
        c.n_rb = 10;
        break;
    case Experiment::Femto:
        c.sweep_variable = "n_femto";
        c.sweep_values = {0, 2, 4, 6, 8, 10};
        c.scheduler.kinds = {scheduling::SchedulerKind::ProportionalFair};
        break;
    case Experiment::Cfo:
        c.sweep_variable = "snr_db";
        c.sweep_values = {0, 2.5, 5, 7.5, 10, 12.5, 15};
        c.n_drops = 10000;
        c.n_tti = 1;
        c.n_rb = 1;
        break;
    case Experiment::PilotPower:
        c.sweep_variable = "velocity_kmh";
        c.sweep_values = {0, 100, 200, 300, 400, 500};
        c.n_drops = 1;
        c.n_tti = 1;
        c.n_rb = 1;
        break;
    }
    return c;
}

void ExperimentConfig::validate() const
{
    require(n_drops >= 1, "run.n_drops must be >= 1");
    require(n_tti >= 1, "run.n_tti must be >= 1");
    require(n_rb >= 1, "run.n_rb must be >= 1");
    require(rb_bandwidth_hz > 0.0, "run.rb_bandwidth_hz must be positive");
    require(!sweep_values.empty(), "sweep.values must not be empty");
    require(layout.rings >= 0, "layout.rings must be >= 0");
    require(layout.isd_m > 0.0, "layout.isd_m must be positive");
    require(layout.rru_fraction > 0.0 && layout.rru_fraction < 1.0, "layout.rru_fraction must lie in (0, 1)");
    require(propagation.carrier_hz > 0.0, "propagation.carrier_hz must be positive");
    require(propagation.tti_s > 0.0, "propagation.tti_s must be positive");
    require(propagation.velocity_kmh >= 0.0, "propagation.velocity_kmh must be >= 0");
    require(propagation.macro_sigma_db >= 0.0 && propagation.femto_sigma_db >= 0.0,
            "shadowing standard deviations must be >= 0");
    require(propagation.rx_correlation >= 0.0 && propagation.rx_correlation < 1.0,
            "propagation.rx_correlation must lie in [0, 1)");
    require(!scheduler.kinds.empty(), "scheduler.kinds must not be empty");
    require(scheduler.window_tti >= 1.0, "scheduler.window_tti must be >= 1");
    require(!mimo.antennas.empty(), "mimo.antennas must not be empty");
    require(mimo.clsm_bits >= 0 && mimo.clsm_bits <= 10, "mimo.clsm_bits must lie in [0, 10]");

    const auto sorted_unique = [](std::vector<double> v) {
        return std::is_sorted(v.begin(), v.end()) && std::adjacent_find(v.begin(), v.end()) == v.end();
    };
    require(sorted_unique(sweep_values), "sweep.values must be strictly increasing");

    switch (experiment) {
    case Experiment::MuGain:
        for (const auto& a : mimo.antennas)
            require((a.n_tx == 1 && a.n_rx == 1) || (a.n_tx == 2 && a.n_rx == 2) || (a.n_tx == 4 && a.n_rx == 4),
                    "mimo.antennas: mu-gain supports 1x1, 2x2 and 4x4, got " + to_string(a));
        for (double k : sweep_values) require(k >= 1.0 && is_integral(k), "sweep.values: user counts must be integers >= 1");
        break;
    case Experiment::Das:
        require(das.n_rx >= 1, "das.n_rx must be >= 1");
        require(das.feedback_bits >= 1 && das.feedback_bits <= 12, "das.feedback_bits must lie in [1, 12]");
        require(das.pu2rc_matrix_bits >= 0 && das.pu2rc_sinr_bits >= 1, "das PU2RC bit split must be non-negative");
        require(das.sinr_step_db > 0.0, "das.sinr_step_db must be positive");
        require(das.calibration_rings >= 1, "das.calibration_rings must be >= 1");
        require(!das.modes.empty(), "das.modes must not be empty");
        for (double k : sweep_values) require(k >= 1.0 && is_integral(k), "sweep.values: users per cell must be integers >= 1");
        break;
    case Experiment::Femto:
        require(femto.n_clusters >= 1 && femto.users_per_cluster >= 1, "femto cluster counts must be >= 1");
        require(femto.cluster_radius_m > 0.0, "femto.cluster_radius_m must be positive");
        for (double n : sweep_values)
            require(n >= 0.0 && is_integral(n) && n <= static_cast<double>(femto.n_clusters),
                    "sweep.values: femto counts must be integers in [0, femto.n_clusters]");
        break;
    case Experiment::Cfo:
        require(cfo.c_mse > 0.0, "cfo.c_mse must be positive");
        require(cfo.n_re >= 1, "cfo.n_re must be >= 1");
        break;
    case Experiment::PilotPower:
        require(pilot.budget > 0.0, "pilot.budget must be positive");
        require(pilot.c_noise > 0.0 && pilot.c_floor >= 0.0, "pilot estimator coefficients out of range");
        require(pilot.density_base > 0.0, "pilot.density_base must be positive");
        require(pilot.gain_draws >= 1, "pilot.gain_draws must be >= 1");
        for (double v : sweep_values)
            require(v >= 0.0 && v <= 500.0, "sweep.values: velocities must lie in [0, 500] km/h");
        break;
    }
}

const std::vector<std::string>& known_keys()
{
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> out;
        for (const auto& [k, _] : setters()) out.push_back(k);
        return out;
    }();
    return keys;
}

void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value)
{
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown configuration key '" + key + "'");
    it->second(config, key, value);
}

std::pair<std::string, std::string> parse_override(const std::string& text)
{
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like section.key=value, got '" + text + "'");
    return {trim(text.substr(0, eq)), trim(text.substr(eq + 1))};
}

ExperimentConfig parse_config(std::istream& in, std::optional<Experiment> experiment,
                              const std::vector<std::pair<std::string, std::string>>& overrides)
{
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("malformed configuration: ") + e.what());
    }

    std::vector<std::pair<std::string, std::string>> settings;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError("unknown configuration key '" + section + "' (keys must live in a [section])");
        for (const auto& [key, value] : body) {
            // read_ini keeps trailing "; note" text in the value.
            std::string text = value.get_value<std::string>();
            const auto cut = text.find_first_of(";#");
            if (cut != std::string::npos) text = trim(text.substr(0, cut));
            settings.emplace_back(section + "." + key, text);
        }
    }
    settings.insert(settings.end(), overrides.begin(), overrides.end());

    for (const auto& [key, value] : settings)
        if (setters().find(key) == setters().end()) throw ConfigError("unknown configuration key '" + key + "'");

    if (!experiment) {
        for (const auto& [key, value] : settings)
            if (key == "run.experiment") {
                try {
                    experiment = parse_experiment(trim(value));
                } catch (const InvalidParameter& e) {
                    throw ConfigError(std::string("run.experiment: ") + e.what());
                }
            }
    }
    if (!experiment) throw ConfigError("run.experiment is not set");

    ExperimentConfig config = default_config(*experiment);
    for (const auto& [key, value] : settings) apply_setting(config, key, value);
    config.validate();
    return config;
}

ExperimentConfig load_config(const std::string& path, std::optional<Experiment> experiment,
                             const std::vector<std::pair<std::string, std::string>>& overrides)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open configuration file", path);
    return parse_config(in, experiment, overrides);
}

} // namespace ltesim::sim
