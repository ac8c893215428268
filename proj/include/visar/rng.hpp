#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace visar {

/// Deterministic random source. mt19937_64 output is pinned by the
/// standard; the distribution transforms are written out explicitly because
/// std::uniform_real_distribution and friends vary across library
/// implementations.
struct Rng {
    std::mt19937_64 eng;

    explicit Rng(uint64_t seed) : eng(seed) {}

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

    /// Uniform in [a, b).
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Uniform integer in [lo, hi].
    int64_t uniform_int(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(eng() % static_cast<uint64_t>(hi - lo + 1));
    }

    /// Standard normal via Box-Muller (cosine branch).
    double normal() {
        double u1 = static_cast<double>((eng() >> 11) + 1) * 0x1.0p-53; // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }
};

} // namespace visar
