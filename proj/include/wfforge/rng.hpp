#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace wfforge {

// All stochastic components draw from std::mt19937_64, whose output sequence
// is fixed by the standard, so a seed reproduces the same bytes everywhere.
using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent child seed for stream `stream` of a parent seed.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) {
    return splitmix64(parent ^ splitmix64(stream));
}

/// FNV-1a over the bytes of `text`, mixed with `parent`.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return derive_seed(parent, h);
}

__extension__ using uint128 = unsigned __int128;

/// Uniform integer in [0, bound) by multiply-shift; bound must be nonzero.
inline std::uint64_t bounded(Rng& rng, std::uint64_t bound) {
    return static_cast<std::uint64_t>((static_cast<uint128>(rng()) * bound) >> 64);
}

} // namespace wfforge
