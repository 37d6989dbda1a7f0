#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ccp {

using Rng = std::mt19937_64;

/// Mixes a master seed with a path of stream identifiers into an independent
/// 64-bit seed (splitmix64 finalizer applied per component).
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

/// Stream tags used when deriving per-task seeds.
namespace stream {
inline constexpr std::uint64_t scaling = 0x5343414cULL;
inline constexpr std::uint64_t washout = 0x57415348ULL;
inline constexpr std::uint64_t fit = 0x464954ULL;
inline constexpr std::uint64_t ensemble = 0x454e53ULL;
inline constexpr std::uint64_t hall = 0x48414c4cULL;
inline constexpr std::uint64_t bootstrap = 0x4d4242ULL;
inline constexpr std::uint64_t simulation = 0x53494dULL;
} // namespace stream

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

} // namespace ccp
