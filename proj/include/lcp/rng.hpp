#pragma once

#include <cstdint>
#include <random>

namespace lcp {

/// splitmix64 step. Used only to spread (seed, replicate) pairs into
/// well-separated engine seeds; the heavy lifting is done by mt19937_64.
inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Deterministic per-replicate stream. The engine state is a pure function
/// of (seed, replicate), so parallel schedules and worker counts cannot
/// change any draw.
inline std::mt19937_64 derive_stream(std::uint64_t seed, std::int64_t replicate) {
    std::uint64_t s = seed ^ (0xD1342543DE82EF95ull * (static_cast<std::uint64_t>(replicate) + 1ull));
    const std::uint64_t a = splitmix64(s);
    const std::uint64_t b = splitmix64(s);
    return std::mt19937_64(a ^ (b << 1));
}

}  // namespace lcp
