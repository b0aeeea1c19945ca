#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gpx::rng {

/// splitmix64 — used to mix (seed, label, index) into independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_label(std::string_view label) {
    // FNV-1a
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

/// Derives an independent substream seed from (root seed, purpose label, index).
/// All randomness in the project flows through this so that parallel and serial
/// execution orders produce identical draws.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label, std::uint64_t index = 0) {
    return splitmix64(splitmix64(seed ^ hash_label(label)) ^ index);
}

inline std::mt19937_64 make_engine(std::uint64_t seed, std::string_view label, std::uint64_t index = 0) {
    return std::mt19937_64{derive_seed(seed, label, index)};
}

} // namespace gpx::rng
