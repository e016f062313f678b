#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace kcurve {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based child seed: a pure function of the parent seed and the key path.
/// Trials keyed this way are independent of scheduling order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t s = splitmix64(seed);
    for (std::uint64_t k : keys) s = splitmix64(s ^ splitmix64(k + 0x632be59bd9b4e019ULL));
    return s;
}

// Stream tags used with derive_seed.
namespace stream {
inline constexpr std::uint64_t target = 1;
inline constexpr std::uint64_t train = 2;
inline constexpr std::uint64_t test = 3;
inline constexpr std::uint64_t noise = 4;
inline constexpr std::uint64_t normalization = 5;
}  // namespace stream

}  // namespace kcurve
