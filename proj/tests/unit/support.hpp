#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace testing {

// Seeded case generator for hand-rolled property tests. Failures print the
// seed and case index through doctest's CAPTURE.
inline std::mt19937_64 rng_for(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline bool rel_close(double a, double b, double tol) {
    return std::fabs(a - b) <= tol * std::max(std::fabs(a), std::fabs(b));
}

} // namespace testing
