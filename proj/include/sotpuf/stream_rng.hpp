#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace sotpuf {

// Counter-based random streams. A draw is a pure function of
// (key, index, counter), so cells can be updated in any order or in parallel
// and still reproduce the same bits.

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t stream_bits(std::uint64_t key, std::uint64_t index, std::uint64_t counter) noexcept {
    std::uint64_t h = splitmix64(key ^ 0x5851f42d4c957f2dULL);
    h = splitmix64(h ^ index);
    h = splitmix64(h ^ (counter * 0xd1342543de82ef95ULL));
    return h;
}

/// Uniform double in [0, 1) with 53 random bits.
constexpr double stream_uniform(std::uint64_t key, std::uint64_t index, std::uint64_t counter) noexcept {
    return static_cast<double>(stream_bits(key, index, counter) >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on two consecutive counters.
inline double stream_normal(std::uint64_t key, std::uint64_t index, std::uint64_t counter) noexcept {
    const double u1 = 1.0 - stream_uniform(key, index, 2 * counter);  // (0, 1]
    const double u2 = stream_uniform(key, index, 2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Derives a sub-key so independent purposes (sampling, writes, reads) never share draws.
constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t domain) noexcept {
    return splitmix64(seed ^ splitmix64(domain + 0x632be59bd9b4e019ULL));
}

namespace rng_domain {
inline constexpr std::uint64_t population = 1;
inline constexpr std::uint64_t write = 2;
inline constexpr std::uint64_t read = 3;
inline constexpr std::uint64_t calibration = 4;
}  // namespace rng_domain

}  // namespace sotpuf
