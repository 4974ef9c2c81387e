#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

#include "cofo/common.hpp"

namespace cofo {

/// Fully specified 64-bit PRNG (splitmix64). Substreams for parallel work are
/// derived by hashing (seed, label, index) rather than by splitting a shared
/// sequential stream, so results do not depend on scheduling.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    static Rng substream(std::uint64_t seed, std::string_view label,
                         std::uint64_t index) {
        return Rng(derive_seed(seed, label, index));
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53 random bits.
    double uniform01() { return (next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

    /// Uniform double in (lo, hi]: exact upper endpoint is attainable.
    double uniform_open_lo(double lo, double hi) {
        return hi - uniform01() * (hi - lo);
    }

    /// Uniform integer in [0, n) without modulo bias (Lemire's method).
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Poisson sample: product-of-uniforms inversion for small means,
    /// transformed rejection (PTRS) for large ones.
    long poisson(double mean) {
        if (!(mean > 0.0)) return 0;
        if (mean < 10.0) return poisson_inversion(mean);
        return poisson_ptrs(mean);
    }

private:
    long poisson_inversion(double mean) {
        const double floor_prob = std::exp(-mean);
        long count = 0;
        double prod = 1.0;
        for (;;) {
            prod *= uniform01();
            if (prod > floor_prob)
                ++count;
            else
                return count;
        }
    }

    long poisson_ptrs(double mean) {
        const double slam = std::sqrt(mean);
        const double loglam = std::log(mean);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
        const double vr = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            const double u = uniform01() - 0.5;
            const double v = uniform01();
            const double us = 0.5 - std::fabs(u);
            const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= vr) return static_cast<long>(k);
            if (k < 0.0 || (us < 0.013 && v > us)) continue;
            if (std::log(v) + std::log(invalpha) -
                    std::log(a / (us * us) + b) <=
                k * loglam - mean - std::lgamma(k + 1.0))
                return static_cast<long>(k);
        }
    }

    std::uint64_t state_;
};

}  // namespace cofo
