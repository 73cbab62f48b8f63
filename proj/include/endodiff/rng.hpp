#pragma once

#include <cstdint>
#include <string_view>

namespace endodiff {

/// splitmix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Derives the sub-seed for stream `stream` of a master seed.
///
/// Replication i of a Monte Carlo loop uses derive_seed(seed, i), so results
/// do not depend on how replications are scheduled across threads.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return mix64(seed + 0x9E3779B97F4A7C15ull * (stream + 1));
}

/// FNV-1a hash of a name; used to derive per-scenario seeds so that results
/// are tied to scenario names, not list positions.
constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ull;
    }
    return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view name) noexcept {
    return derive_seed(seed, fnv1a64(name));
}

} // namespace endodiff
