#pragma once

#include <cstdint>
#include <random>

namespace gsim::util {

// splitmix64; used to derive independent per-(seed, step, vehicle) draws so
// the simulation transition stays a pure function of its inputs.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix3(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return splitmix64(splitmix64(splitmix64(a) ^ b) ^ c);
}

/// Uniform draw in [0, 1) from 64 raw bits. Avoids std::uniform_real_distribution,
/// whose output sequence is implementation-defined.
inline double u01(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline double next_u01(std::mt19937_64& rng) {
    return u01(rng());
}

/// Uniform draw in [-half_width, half_width).
inline double next_symmetric(std::mt19937_64& rng, double half_width) {
    return (2.0 * next_u01(rng) - 1.0) * half_width;
}

} // namespace gsim::util
