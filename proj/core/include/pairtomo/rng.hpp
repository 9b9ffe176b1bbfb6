#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pairtomo::rng {

// splitmix64 finalizer; good avalanche, cheap.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Derives an independent substream key from (seed, purpose, index).
// All randomness in the toolkit flows through here so that a single
// top-level seed makes every pipeline reproducible, and per-index
// streams can be consumed in any order (e.g. in parallel).
constexpr std::uint64_t derive(std::uint64_t seed, std::string_view purpose,
                               std::uint64_t index = 0) {
    return mix64(mix64(seed ^ fnv1a(purpose)) + index);
}

inline std::mt19937_64 stream(std::uint64_t seed, std::string_view purpose,
                              std::uint64_t index = 0) {
    return std::mt19937_64(derive(seed, purpose, index));
}

}  // namespace pairtomo::rng
