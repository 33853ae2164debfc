#pragma once

#include <cstdint>
#include <random>

namespace collusion {

using Rng = std::mt19937_64;

// SplitMix64 finalizer. All seeds in the library are derived from one root
// seed through this function: child = mix(parent ^ mix(tag)), so a stream is
// identified by its path of tags (episode index, period, purpose) and never by
// the order in which work happens to be scheduled.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag) noexcept {
  return mix_seed(parent ^ mix_seed(tag + 0x632be59bd9b4e019ULL));
}

template <typename... Tags>
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag, Tags... rest) noexcept {
  return derive_seed(derive_seed(parent, tag), static_cast<std::uint64_t>(rest)...);
}

// Stream tags used across modules.
namespace stream {
inline constexpr std::uint64_t kEpisode = 1;
inline constexpr std::uint64_t kState = 2;
inline constexpr std::uint64_t kNoise = 3;
inline constexpr std::uint64_t kDetection = 4;
inline constexpr std::uint64_t kTesting = 5;
inline constexpr std::uint64_t kInstance = 6;
inline constexpr std::uint64_t kTrial = 7;
inline constexpr std::uint64_t kCandidate = 8;
inline constexpr std::uint64_t kMonteCarlo = 9;
}  // namespace stream

inline Rng make_rng(std::uint64_t seed) { return Rng(mix_seed(seed)); }

// Uniform draw in [0, 1) that only depends on the generator state, so results
// do not vary with the standard library's distribution implementation.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace collusion
