#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace ltesim {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Named sub-streams of one drop. Adding a purpose never shifts the others.
enum class StreamPurpose : std::uint64_t {
    Geometry = 1,
    Shadowing = 2,
    Fading = 3,
    Codebook = 4,
    Cfo = 5,
    Channel = 6,
    Test = 99,
};

/// A seeded random stream. Every random draw in the simulator goes through
/// one of these; there is no global generator.
///
/// Streams are derived from (seed, drop, purpose) by hashing, so a drop's
/// draws depend only on its own index and never on execution order.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    static RngStream derive(std::uint64_t seed, std::uint64_t drop, StreamPurpose purpose,
                            std::uint64_t sub = 0)
    {
        std::uint64_t h = splitmix64(seed);
        h = splitmix64(h ^ (drop + 0x632be59bd9b4e019ULL));
        h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
        h = splitmix64(h ^ (sub * 0xd6e8feb86659fd93ULL));
        return RngStream(h);
    }

    /// Uniform on [0, 1).
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

    double normal(double mean = 0.0, double stddev = 1.0) { return normal_(engine_) * stddev + mean; }

    /// Circularly symmetric complex Gaussian with E|z|^2 = 1.
    std::complex<double> complex_normal()
    {
        constexpr double kHalf = 0.70710678118654752440;
        const double re = normal_(engine_);
        const double im = normal_(engine_);
        return {re * kHalf, im * kHalf};
    }

    std::uint64_t poisson(double mean)
    {
        if (mean <= 0.0) return 0;
        return std::poisson_distribution<std::uint64_t>(mean)(engine_);
    }

    std::uint64_t next() { return engine_(); }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace ltesim
