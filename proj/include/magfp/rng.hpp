#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace magfp {

/// Seeded random source with fully specified output. The engine is mt19937_64
/// (bit-exact by the standard); the value transforms are implemented here
/// instead of std::*_distribution so that generated artifacts are
/// byte-reproducible across standard libraries, not just across runs.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform in [lo, hi). 53-bit resolution.
    double uniform_real(double lo, double hi) {
        const double u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
        return lo + u * (hi - lo);
    }

    /// Uniform integer in [lo, hi], inclusive. Rejection sampling, unbiased.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<std::int64_t>(eng_());  // full range
        const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return lo + static_cast<std::int64_t>(x % span);
    }

    /// Gaussian via Box-Muller; two uniform draws per call, no cached spare.
    double normal(double mean, double stddev) {
        const double u1 = 1.0 - uniform_real(0.0, 1.0);  // (0, 1], keeps log finite
        const double u2 = uniform_real(0.0, 1.0);
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(2.0 * 3.141592653589793 * u2);
    }

  private:
    std::mt19937_64 eng_;
};

/// Derives an independent stream seed from (seed, stream). splitmix64 finalizer.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace magfp
