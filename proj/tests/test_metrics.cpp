#include <cmath>
#include <vector>

#include "catch_amalgamated.hpp"

#include "ltesim/error.hpp"
#include "ltesim/metrics.hpp"
#include "oracles.hpp"

using namespace ltesim;
using namespace ltesim::metrics;

TEST_CASE("Jain index", "[metrics]")
{
    const std::vector<double> equal(5, 3.2);
    CHECK(jain_index(equal) == Catch::Approx(1.0).epsilon(1e-15));
    const std::vector<double> one_hot{0.0, 0.0, 7.0, 0.0};
    CHECK(jain_index(one_hot) == Catch::Approx(0.25).epsilon(1e-15));
    const std::vector<double> ramp{1.0, 2.0, 3.0};
    CHECK(jain_index(ramp) == Catch::Approx(6.0 / 7.0).epsilon(1e-15));

    RngStream rng = RngStream::derive(1, 0, StreamPurpose::Test);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> x(10);
        for (double& v : x) v = rng.uniform(0.0, 5e6);
        std::vector<double> scaled = x;
        for (double& v : scaled) v *= 0.37;
        const double j = jain_index(x);
        CHECK(j == Catch::Approx(oracle::jain(x)).epsilon(1e-12));
        CHECK(jain_index(scaled) == Catch::Approx(j).epsilon(1e-12));
        CHECK(j >= 0.1 - 1e-12);
        CHECK(j <= 1.0 + 1e-12);
    }
    CHECK_THROWS_AS(jain_index(std::vector<double>(3, 0.0)), UndefinedFairness);
    CHECK_THROWS_AS(jain_index(std::vector<double>{}), InvalidParameter);
}

TEST_CASE("log-log gain fit", "[metrics]")
{
    std::vector<GainPoint> pts;
    for (double k = 2.0; k <= 64.0; k += 2.0) pts.push_back({k, 3.0 * std::log(std::log(2.0 * k))});
    const GainFit fit = fit_loglog_gain(pts);
    CHECK(fit.m == Catch::Approx(3.0).epsilon(0.01));
    CHECK(fit.b == Catch::Approx(2.0).epsilon(0.01));
    CHECK(fit.r_squared == Catch::Approx(1.0).epsilon(1e-9));
    CHECK(fit(10.0) == Catch::Approx(3.0 * std::log(std::log(20.0))).epsilon(1e-6));

    std::vector<GainPoint> scaled = pts;
    for (auto& p : scaled) p.throughput *= 4.5;
    const GainFit fs = fit_loglog_gain(scaled);
    CHECK(fs.m == Catch::Approx(4.5 * fit.m).epsilon(1e-6));
    CHECK(fs.b == Catch::Approx(fit.b).epsilon(1e-6));

    std::vector<GainPoint> flat;
    for (double k : {2.0, 5.0, 10.0, 20.0}) flat.push_back({k, 7.0});
    CHECK(fit_loglog_gain(flat).r_squared == 0.0);

    CHECK_THROWS_AS(fit_loglog_gain(std::vector<GainPoint>{{2, 1}, {3, 2}}), InvalidParameter);
    CHECK_THROWS_AS(fit_loglog_gain(std::vector<GainPoint>{{1, 1}, {3, 2}, {4, 3}}), InvalidParameter);
}

TEST_CASE("area spectral efficiency", "[metrics]")
{
    const std::vector<double> zero(4, 0.0);
    CHECK(area_spectral_efficiency(zero, 1e5, 1e7) == 0.0);
    const std::vector<double> cells{10e6, 20e6, 30e6};
    CHECK(area_spectral_efficiency(cells, 2e5, 10e6) == Catch::Approx(60e6 / (2e5 * 10e6)));
    CHECK(area_spectral_efficiency(cells, 4e5, 10e6) ==
          Catch::Approx(area_spectral_efficiency(cells, 2e5, 10e6) / 2.0));
    CHECK_THROWS_AS(area_spectral_efficiency(cells, 0.0, 1.0), InvalidParameter);
}

TEST_CASE("tier split", "[metrics]")
{
    using geometry::Tier;
    const ThroughputReport macro_only({{2, 5.0, Tier::Macro}, {1, 3.0, Tier::Macro}});
    CHECK(macro_only.users().front().user_id == 1);
    CHECK(macro_only.cell_sum() == 8.0);
    const TierSplit m = tier_split_report(macro_only);
    CHECK_FALSE(m.femto.has_value());
    CHECK(*m.macro == 4.0);
    CHECK(m.combined == 4.0);

    const ThroughputReport mixed({{0, 1.0, Tier::Macro}, {1, 3.0, Tier::Femto}});
    const TierSplit s = tier_split_report(mixed);
    CHECK(*s.macro == 1.0);
    CHECK(*s.femto == 3.0);
    CHECK(s.combined == 2.0);

    RngStream rng = RngStream::derive(2, 0, StreamPurpose::Test);
    for (int t = 0; t < 20; ++t) {
        std::vector<UserThroughput> users;
        for (int u = 0; u < 15; ++u)
            users.push_back({u, rng.uniform(0.0, 1e6), rng.uniform() < 0.4 ? Tier::Femto : Tier::Macro});
        const TierSplit r = tier_split_report(ThroughputReport(users));
        const double nm = static_cast<double>(r.n_macro);
        const double nf = static_cast<double>(r.n_femto);
        const double weighted = (nm * r.macro.value_or(0.0) + nf * r.femto.value_or(0.0)) / (nm + nf);
        CHECK(std::abs(r.combined - weighted) <= 1e-12 * std::max(1.0, r.combined));
    }
    CHECK_THROWS_AS(tier_split_report(ThroughputReport{}), InvalidParameter);
}
