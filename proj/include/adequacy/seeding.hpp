#pragma once

// Seed derivation for reproducible Monte Carlo streams.
//
// Every random stream in the library is an std::mt19937_64 seeded with a
// value derived from the run seed and a stream path of counters:
//
//     derive_seed(seed, i)        = splitmix64(splitmix64(seed) ^ (i * K))
//     derive_seed(seed, i, j)     = derive_seed(derive_seed(seed, i), j)
//
// where K = 0x9E3779B97F4A7C15 (the 64-bit golden ratio) and splitmix64 is
// the finalizer from Steele, Lea & Flood (2014). Streams are addressed by
// position rather than drawn sequentially from a parent generator, so
// adding units or replications never perturbs existing streams.
//
// Uniform doubles are built from the top 53 bits of each engine output,
// which keeps sequences identical across standard library vendors
// (std::uniform_real_distribution is not portable).

#include <cmath>
#include <cstdint>
#include <random>

namespace adequacy {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(seed) ^ (index * 0x9E3779B97F4A7C15ull));
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t i, std::uint64_t j) noexcept {
    return derive_seed(derive_seed(seed, i), j);
}

using Engine = std::mt19937_64;

/// Uniform on [0, 1).
inline double uniform01(Engine& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Uniform on (0, 1]; safe to pass to log().
inline double uniform_open0(Engine& eng) {
    return static_cast<double>((eng() >> 11) + 1) * 0x1.0p-53;
}

/// Standard normal via Box-Muller (one output per call).
inline double standard_normal(Engine& eng) {
    constexpr double two_pi = 6.283185307179586476925286766559;
    const double u1 = uniform_open0(eng);
    const double u2 = uniform01(eng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

}  // namespace adequacy
