// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <set>
#include <string>
#include <vector>

#include "ltesim/error.hpp"
#include "ltesim/experiments.hpp"
#include "ltesim/linkmodel.hpp"
#include "ltesim/metrics.hpp"
#include "ltesim/mimo.hpp"
#include "ltesim/scheduling.hpp"
#include "oracles.hpp"

using namespace ltesim;
using namespace ltesim::sim;

namespace {

// One-sided 95% normal quantile.
constexpr double kZ95 = 1.6448536269514722;

struct Verdict {
    bool ok = true;
    std::string detail;

    void check(bool cond, const std::string& what)
    {
        if (!detail.empty()) detail += "; ";
        detail += (cond ? "" : "!") + what;
        ok = ok && cond;
    }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0)
{
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

int failures = 0;

void report(int n, const char* name, const Verdict& v)
{
    std::printf("%s criterion %d (%s): %s\n", v.ok ? "PASS" : "FAIL", n, name, v.detail.c_str());
    std::fflush(stdout);
    if (!v.ok) ++failures;
}

mimo::CMatrix gaussian(Eigen::Index rows, Eigen::Index cols, RngStream& rng)
{
    mimo::CMatrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.complex_normal();
    return m;
}

// ---------------------------------------------------------------------------

void multi_user_gain(const ResultTable& t)
{
    Verdict v;
    const double r2 = t.at(0.0, "fit_r2.best-cqi.1x1").mean;
    v.check(r2 >= 0.9, fmt("best-cqi 1x1 R2=%.3f", r2));

    const std::vector<double> ks{2, 5, 10, 20, 40, 64};
    const auto& base = t.at(ks.front(), "sum_tput.rr.1x1");
    double worst = 0.0;
    for (double k : ks) {
        const auto& r = t.at(k, "sum_tput.rr.1x1");
        const double se = std::hypot(r.std_error, base.std_error);
        worst = std::max(worst, std::abs(r.mean - base.mean) / se);
    }
    v.check(worst <= 2.0, fmt("rr 1x1 max deviation %.2f SE", worst));
    report(1, "multi-user gain", v);
}

void multiplexing_gain(const ResultTable& t)
{
    Verdict v;
    const double g2 = t.at(0.0, "gain_ratio.best-cqi.2x2").mean;
    const double g4 = t.at(0.0, "gain_ratio.best-cqi.4x4").mean;
    v.check(g2 > 1.0 && g2 < 2.0 && std::abs(g2 - 1.56) <= 0.5, fmt("2x2 ratio %.3f (ref 1.56)", g2));
    v.check(g4 > 2.0 && g4 < 4.0 && std::abs(g4 - 2.66) <= 0.8, fmt("4x4 ratio %.3f (ref 2.66)", g4));
    report(2, "multiplexing gain", v);
}

void scheduler_orderings()
{
    Verdict v;
    ExperimentConfig c = default_config(Experiment::MuGain);
    c.n_drops = 100;
    c.n_tti = 200;
    c.mimo.antennas = {{1, 1}};
    c.sweep_values = {5, 10, 20};
    const ResultTable t = run_mu_gain(c);
    for (double k : c.sweep_values) {
        const double s_rr = t.at(k, "sum_tput.rr.1x1").mean;
        const double s_pf = t.at(k, "sum_tput.pf.1x1").mean;
        const double s_bc = t.at(k, "sum_tput.best-cqi.1x1").mean;
        v.check(s_bc >= s_pf && s_pf >= s_rr, fmt("k=%g sum bc/pf/rr %.3g", k, s_bc / 1e6) + fmt("/%.3g/%.3g Mbit/s", s_pf / 1e6, s_rr / 1e6));
        const double j_rr = t.at(k, "jain.rr.1x1").mean;
        const double j_pf = t.at(k, "jain.pf.1x1").mean;
        const double j_bc = t.at(k, "jain.best-cqi.1x1").mean;
        v.check(j_rr >= j_pf && j_pf >= j_bc, fmt("k=%g jain rr/pf/bc %.3f", k, j_rr) + fmt("/%.3f/%.3f", j_pf, j_bc));
    }

    RngStream rng = RngStream::derive(3, 0, StreamPurpose::Test);
    bool equal = true;
    for (int i = 0; i < 1000; ++i) {
        scheduling::RateMatrix m(8, 12);
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index col = 0; col < m.cols(); ++col) m(r, col) = std::floor(rng.uniform(0.0, 10.0)) * 0.45;
        auto state = scheduling::SchedulerState::with_averages(std::vector<double>(8, rng.uniform(1e3, 1e7)));
        equal = equal && scheduling::schedule_proportional_fair(m, state, 180e3) == scheduling::schedule_best_cqi(m);
    }
    v.check(equal, "PF == best-CQI bitwise under uniform averages (1000 matrices with ties)");
    report(3, "scheduler orderings", v);
}

void das_comparison()
{
    Verdict v;
    const ExperimentConfig c = default_config(Experiment::Das);
    const ResultTable t = run_das(c);
    const auto above = [&](double x, const std::string& metric, const char* label) {
        const auto& r = t.at(x, metric);
        const double lower = r.mean - kZ95 * r.std_error;
        v.check(lower > 0.0, std::string(label) + fmt(" @%g: %+.2f +- %.2f", x, r.mean, r.std_error));
    };
    for (double x : c.sweep_values) {
        if (x < 8.0) continue;
        above(x, "diff.zf-perfect_minus_svd-perfect.das", "zf-perfect > svd-perfect (das)");
        above(x, "diff.zf-perfect_minus_svd-perfect.centralized", "zf-perfect > svd-perfect (centralized)");
        above(x, "diff.zf-quantized.das_minus_centralized", "zf-quantized das > centralized");
        const auto& r = t.at(x, "diff.zf-quantized_minus_pu2rc-quantized.das");
        v.check(r.mean - kZ95 * r.std_error >= 0.0,
                fmt("pu2rc <= zf-quantized (das) @%g: %+.2f +- %.2f", x, r.mean, r.std_error));
    }
    report(4, "distributed antennas", v);
}

void zf_correctness()
{
    Verdict v;
    RngStream rng = RngStream::derive(5, 0, StreamPurpose::Test);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Eigen::Index k = 2 + i % 3;
        const mimo::CMatrix rows = gaussian(k, 4, rng);
        const auto d = mimo::zf_precoder(rows, 1.0);
        const Eigen::MatrixXd g = (rows * d.precoder).cwiseAbs2();
        for (Eigen::Index a = 0; a < k; ++a)
            for (Eigen::Index b = 0; b < k; ++b)
                if (a != b) worst = std::max(worst, g(a, b) / g(a, a));
    }
    v.check(worst <= 1e-9, fmt("max relative leakage %.2e over 1000 instances", worst));

    double worst_ratio = 1.0;
    for (int i = 0; i < 500; ++i) {
        std::vector<mimo::ZfCandidate> cands;
        std::vector<oracle::CRow> rows;
        for (int u = 0; u < 6; ++u) {
            const mimo::CRow h = gaussian(1, 4, rng) * std::sqrt(rng.uniform(0.1, 3.0));
            cands.push_back({h, 1.0, 0.0});
            rows.push_back(h);
        }
        const auto sel = mimo::zf_user_selection(cands, 4, 10.0, mimo::CsitMode::Perfect);
        const double greedy = mimo::zf_sum_rate_estimate(cands, sel, 4, 10.0, mimo::CsitMode::Perfect);
        worst_ratio = std::min(worst_ratio, greedy / oracle::zf_exhaustive(rows, 4, 10.0));
    }
    v.check(worst_ratio >= 0.9, fmt("greedy / exhaustive >= %.4f over 500 instances", worst_ratio));
    report(5, "zero-forcing", v);
}

void femto_overlay()
{
    Verdict v;
    const ExperimentConfig c = default_config(Experiment::Femto);
    const ResultTable t = run_femto(c);
    for (std::size_t i = 1; i < c.sweep_values.size(); ++i) {
        const double x = c.sweep_values[i];
        const auto& step = t.at(x, "diff.combined_vs_previous");
        v.check(step.mean >= -2.0 * step.std_error, fmt("combined step @%g: %+.3g +- %.2g", x, step.mean, step.std_error));
    }
    for (double x : c.sweep_values) {
        if (x == 0.0) continue;
        const double f = t.at(x, "tput.femto").mean;
        const double m = t.at(x, "tput.macro").mean;
        v.check(f > m, fmt("@%g femto %.3g > macro %.3g", x, f, m));
        v.check(t.find(x, "jain") != nullptr, "jain reported");
    }
    const std::vector<double> equal(6, 2.5);
    const std::vector<double> one_hot{0.0, 4.0, 0.0, 0.0};
    const std::vector<double> ramp{1.0, 2.0, 3.0};
    v.check(std::abs(metrics::jain_index(equal) - 1.0) <= 1e-15, "J(equal)=1");
    v.check(std::abs(metrics::jain_index(one_hot) - 0.25) <= 1e-15, "J(one-hot,4)=0.25");
    v.check(std::abs(metrics::jain_index(ramp) - 6.0 / 7.0) <= 1e-15, "J(1,2,3)=6/7");
    report(6, "femto overlay", v);
}

void cfo_chain()
{
    Verdict v;
    ExperimentConfig c = default_config(Experiment::Cfo);
    c.n_drops = 10000;
    const ResultTable t = run_cfo(c);
    double worst = 0.0;
    for (double x : c.sweep_values) {
        const double p = t.at(x, "loss.predicted").mean;
        const double s = t.at(x, "loss.simulated").mean;
        worst = std::max(worst, std::abs(s - p) / p);
    }
    v.check(worst <= 0.05, fmt("max relative gap %.4f over %g grid points", worst, static_cast<double>(c.sweep_values.size())));

    const std::vector<double> res{1.0, 10.0, 100.0};
    v.check(linkmodel::throughput_loss(res, 0.0) == 0.0, "loss(0) == 0");
    bool monotone = true;
    double prev = 0.0;
    for (int i = 1; i < 1000; ++i) {
        const double eps = 0.999 * i / 1000.0;
        const double a = linkmodel::throughput_loss(res, eps);
        monotone = monotone && a >= prev && linkmodel::throughput_loss(res, -eps) == a;
        prev = a;
    }
    v.check(monotone, "monotone in |eps|");
    report(7, "CFO chain", v);
}

void pilot_power()
{
    Verdict v;
    const ExperimentConfig c = default_config(Experiment::PilotPower);
    const ResultTable t = run_pilot_power(c);
    for (const auto& a : c.mimo.antennas) {
        const std::string tag = to_string(a);
        double min_ratio = 1e9;
        double max_used = 0.0;
        for (double x : c.sweep_values) {
            min_ratio = std::min(min_ratio, t.at(x, "throughput_ratio." + tag).mean);
            max_used = std::max(max_used, t.at(x, "power_used_pct." + tag).mean);
            if (x >= 200.0) {
                const double used = t.at(x, "power_used_pct." + tag).mean;
                v.check(used < 100.0, tag + fmt(" @%g km/h saving %.2e %%", x, 100.0 - used));
            }
        }
        v.check(min_ratio >= 0.99 && max_used <= 100.0,
                tag + fmt(" min throughput ratio %.6f, max power %.4f %%", min_ratio, max_used));
    }

    linkmodel::SplitSetup hi;
    hi.noise_power = 1e-1;
    linkmodel::SplitSetup lo;
    lo.noise_power = 1e-3;
    const double df = std::abs(linkmodel::optimal_power_split(hi, 1.0).pilot_fraction() -
                               linkmodel::optimal_power_split(lo, 1.0).pilot_fraction());
    v.check(df <= 1e-6, fmt("v=0 pilot fraction drift %.1e", df));

    oracle::SplitModel m;
    linkmodel::SplitSetup s;
    const double grid = oracle::best_pilot_fraction_grid(m, 1.0, 1000000);
    const double opt = linkmodel::optimal_power_split(s, 1.0).pilot_fraction();
    v.check(std::abs(opt - grid) <= 1e-5, fmt("v=0 optimum %.6f vs grid %.6f", opt, grid));

    s.velocity_kmh = 200.0;
    m.velocity = 200.0;
    const double target = linkmodel::split_sinr(s, linkmodel::optimal_power_split(s, 1.0));
    const double eff = linkmodel::power_efficient_split(s, 1.0).total();
    const double grid_total = oracle::min_total_grid(m, 1.0, target * (1.0 - 1e-6), 2000);
    v.check(std::abs(eff - grid_total) <= 1e-3, fmt("v=200 min total %.6f vs grid %.6f", eff, grid_total));
    report(8, "pilot power", v);
}

void statistical_kernels()
{
    Verdict v;
    const geometry::Polygon square({{0, 0}, {100, 0}, {100, 100}, {0, 100}});
    RngStream rng = RngStream::derive(9, 0, StreamPurpose::Test);
    std::vector<double> counts;
    for (int i = 0; i < 10000; ++i)
        counts.push_back(static_cast<double>(geometry::drop_poisson(square, 10.0 / square.area(), rng).size()));
    const double n = 10000.0;
    const double m = oracle::mean(counts);
    const double var = oracle::variance(counts);
    // Sampling spreads: sqrt(lambda / n) for the mean, sqrt((lambda + 2 lambda^2) / n) for the variance.
    v.check(std::abs(m - 10.0) <= 3.0 * std::sqrt(10.0 / n), fmt("Poisson mean %.4f", m));
    v.check(std::abs(var - 10.0) <= 3.0 * std::sqrt(210.0 / n), fmt("Poisson variance %.4f", var));

    for (double rho : {0.0, 0.5, 0.95}) {
        RngStream fr = RngStream::derive(10, 0, StreamPurpose::Fading);
        const auto tr = propagation::generate_fading(10000, 1, 2, 2, rho, fr);
        double power = 0.0;
        std::complex<double> lag = 0.0;
        for (std::size_t t = 0; t < tr.n_tti(); ++t) {
            power += tr.at(t, 0).squaredNorm() / 4.0;
            if (t > 0) lag += (tr.at(t, 0).array() * tr.at(t - 1, 0).array().conjugate()).sum() / 4.0;
        }
        power /= static_cast<double>(tr.n_tti());
        const double r1 = lag.real() / static_cast<double>(tr.n_tti() - 1);
        v.check(std::abs(power - 1.0) <= 0.03 && std::abs(r1 - rho) <= 0.03,
                fmt("rho=%.2f power %.4f lag-1 %.4f", rho, power, r1));
    }
    report(9, "statistical kernels", v);
}

std::string emitted_csv(const ExperimentConfig& c, const std::filesystem::path& dir)
{
    const auto files = emit_results(run_experiment(c), dir);
    std::ifstream in(files.csv, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void reproducibility()
{
    Verdict v;
    const auto root = std::filesystem::temp_directory_path() / "ltesim_acceptance";
    std::filesystem::remove_all(root);
    for (auto e : {Experiment::MuGain, Experiment::Das, Experiment::Femto, Experiment::Cfo, Experiment::PilotPower}) {
        ExperimentConfig c = default_config(e);
        c.n_drops = 8;
        c.n_tti = 20;
        c.seed = 20240501;
        setenv("SIM_THREADS", "1", 1);
        const std::string one = emitted_csv(c, root / (to_string(e) + "_1"));
        setenv("SIM_THREADS", "4", 1);
        const std::string four = emitted_csv(c, root / (to_string(e) + "_4"));
        const std::string again = emitted_csv(c, root / (to_string(e) + "_4b"));
        unsetenv("SIM_THREADS");
        v.check(one == four && four == again && !one.empty(), to_string(e) + " identical");
    }
    std::filesystem::remove_all(root);
    report(10, "reproducibility", v);
}

} // namespace

// Optional arguments pick criteria by number; none runs all ten.
int main(int argc, char** argv)
{
    std::set<int> picked;
    for (int i = 1; i < argc; ++i) picked.insert(std::atoi(argv[i]));
    const auto want = [&](int n) { return picked.empty() || picked.count(n) != 0; };
    try {
        if (want(1) || want(2)) {
            const ResultTable mu = run_mu_gain(default_config(Experiment::MuGain));
            if (want(1)) multi_user_gain(mu);
            if (want(2)) multiplexing_gain(mu);
        }
        if (want(3)) scheduler_orderings();
        if (want(4)) das_comparison();
        if (want(5)) zf_correctness();
        if (want(6)) femto_overlay();
        if (want(7)) cfo_chain();
        if (want(8)) pilot_power();
        if (want(9)) statistical_kernels();
        if (want(10)) reproducibility();
    } catch (const std::exception& e) {
        std::printf("FAIL acceptance aborted: %s\n", e.what());
        return 2;
    }
    std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
