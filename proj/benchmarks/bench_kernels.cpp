#include <vector>

#include <benchmark/benchmark.h>

#include "ltesim/mimo.hpp"
#include "ltesim/propagation.hpp"
#include "ltesim/rng.hpp"
#include "ltesim/scheduling.hpp"

using namespace ltesim;

namespace {

mimo::CMatrix gaussian(Eigen::Index rows, Eigen::Index cols, RngStream& rng)
{
    mimo::CMatrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.complex_normal();
    return m;
}

void clsm_search(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    RngStream rng = RngStream::derive(1, 0, StreamPurpose::Codebook);
    const mimo::PrecoderCodebook cb = mimo::PrecoderCodebook::random(n, n, 4, rng);
    const mimo::CMatrix h = gaussian(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n), rng);
    for (auto _ : state) benchmark::DoNotOptimize(mimo::clsm_transceiver(h, cb, 10.0));
}
BENCHMARK(clsm_search)->Arg(2)->Arg(4);

void zf_selection(benchmark::State& state)
{
    const auto k = static_cast<std::size_t>(state.range(0));
    RngStream rng = RngStream::derive(2, 0, StreamPurpose::Test);
    std::vector<mimo::ZfCandidate> candidates;
    for (std::size_t u = 0; u < k; ++u) candidates.push_back({gaussian(1, 4, rng), 1.0, 0.0});
    for (auto _ : state)
        benchmark::DoNotOptimize(mimo::zf_user_selection(candidates, 4, 10.0, mimo::CsitMode::Perfect));
}
BENCHMARK(zf_selection)->Arg(6)->Arg(12)->Arg(24);

void rate_estimation(benchmark::State& state)
{
    const auto k = static_cast<std::size_t>(state.range(0));
    RngStream rng = RngStream::derive(3, 0, StreamPurpose::Fading);
    std::vector<propagation::FadingTrace> traces;
    for (std::size_t u = 0; u < k; ++u) traces.push_back(propagation::generate_fading(1, 50, 1, 1, 0.9, rng));
    std::vector<scheduling::UserLinkBudget> links;
    for (std::size_t u = 0; u < k; ++u) links.push_back({10.0, &traces[u]});
    const scheduling::RateContext context;
    for (auto _ : state) benchmark::DoNotOptimize(scheduling::estimate_rates(links, 0, context));
}
BENCHMARK(rate_estimation)->Arg(10)->Arg(64);

void fading_trace(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    RngStream rng = RngStream::derive(4, 0, StreamPurpose::Fading);
    for (auto _ : state) benchmark::DoNotOptimize(propagation::generate_fading(200, 50, n, n, 0.9, rng));
}
BENCHMARK(fading_trace)->Arg(1)->Arg(4);

} // namespace

BENCHMARK_MAIN();
