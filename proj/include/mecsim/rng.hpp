#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

#include "mecsim/error.hpp"

namespace mecsim {

// Deterministic RNG with a fixed algorithm (xoshiro256++) so that results are
// reproducible across compilers and standard libraries. std::mt19937 would be
// portable too, but the std distributions are not; all sampling here is
// hand-rolled for that reason.

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Derives an independent stream seed from a master seed, a purpose tag and an
/// index. Streams with different tags or indices never share state, which
/// keeps multi-threaded runs deterministic regardless of scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t index = 0) {
    std::uint64_t s = master ^ fnv1a64(tag);
    s += 0x9e3779b97f4a7c15ULL * (index + 1);
    // Two extra mixing rounds so nearby (master, index) pairs decorrelate.
    (void)splitmix64_next(s);
    (void)splitmix64_next(s);
    return s;
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64_next(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) {
        if (!(lo <= hi)) fail(Errc::InvalidArgument, "uniform: lo > hi");
        return lo + (hi - lo) * uniform();
    }

    /// Standard normal via Box-Muller. One variate per call; the sine partner
    /// is discarded so the draw count per call is fixed.
    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Exponential with the given mean (so rate 1/mean).
    double exponential(double mean = 1.0) {
        if (!(mean > 0.0)) fail(Errc::InvalidArgument, "exponential: mean must be positive");
        return -mean * std::log(1.0 - uniform());
    }

    /// Log-normal parameterized by median and log-space sigma:
    /// exp(log(median) + sigma * N(0,1)).
    double lognormal_median(double median, double sigma) {
        if (!(median > 0.0)) fail(Errc::InvalidArgument, "lognormal: median must be positive");
        return std::exp(std::log(median) + sigma * normal());
    }

    bool bernoulli(double p) {
        if (!(p >= 0.0 && p <= 1.0)) fail(Errc::InvalidArgument, "bernoulli: p outside [0,1]");
        return uniform() < p;
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) fail(Errc::InvalidArgument, "below: n must be positive");
        // Rejection sampling to avoid modulo bias.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

}  // namespace mecsim
