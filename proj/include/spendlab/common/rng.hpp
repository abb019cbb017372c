#pragma once

#include <cstdint>
#include <random>

namespace spendlab {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based substream: the state depends only on (seed, stream, index), so
// results never depend on the order in which substreams are consumed.
inline constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream,
                                              std::uint64_t index = 0) noexcept {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) + index);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
  return Rng(substream_seed(seed, stream, index));
}

// Stream tags keep unrelated consumers of one seed apart.
namespace streams {
inline constexpr std::uint64_t kCatalog = 0x11;
inline constexpr std::uint64_t kUser = 0x12;
inline constexpr std::uint64_t kInit = 0x21;
inline constexpr std::uint64_t kShuffle = 0x22;
inline constexpr std::uint64_t kNegatives = 0x31;
inline constexpr std::uint64_t kTies = 0x32;
inline constexpr std::uint64_t kGradCheck = 0x41;
}  // namespace streams

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace spendlab
