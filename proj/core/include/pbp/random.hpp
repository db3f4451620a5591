#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace pbp {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent seeds for sub-streams.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return mix_seed(mix_seed(seed) ^ (stream * 0xd1b54a32d192ed03ULL));
}

template <typename... Streams>
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, Streams... rest) noexcept {
    return derive_seed(derive_seed(seed, stream), static_cast<std::uint64_t>(rest)...);
}

inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline std::size_t uniform_index(std::size_t n, Rng& rng) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

/// Samples an index from unnormalized nonnegative weights. Falls back to the last
/// positive entry when rounding leaves the draw past the cumulative total.
std::size_t sample_index(std::span<const double> weights, Rng& rng);

}  // namespace pbp
