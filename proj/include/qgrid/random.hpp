#pragma once

#include <cstdint>
#include <random>

namespace qgrid {

/// Engine used everywhere a random source is required. mt19937_64 output is
/// fixed by the standard, so seeded runs are reproducible across platforms.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed for trial `index` under `master`. Depends only on the pair, so trial
/// results do not depend on how trials are scheduled across threads.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

// The standard distributions are implementation-defined, so draws are done by
// hand to keep reports byte-identical between standard libraries.

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, bound). `bound` must be positive.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
    // Rejection on the top of the range keeps the draw unbiased.
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t x = rng();
    while (x >= limit) x = rng();
    return x % bound;
}

/// Uniform integer in the inclusive range [lo, hi].
inline std::uint64_t uniform_inclusive(Rng& rng, std::uint64_t lo, std::uint64_t hi) {
    if (hi - lo == UINT64_MAX) return rng();
    return lo + uniform_below(rng, hi - lo + 1);
}

}  // namespace qgrid
