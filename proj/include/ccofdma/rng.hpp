#pragma once

#include <cstdint>
#include <random>

namespace ccofdma {

using Rng = std::mt19937_64;

/// One round of the splitmix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for window `window_id` under `master`. Depends only on the pair, so a
/// window keeps its stream when the batch grows.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t window_id) {
  return splitmix64(master ^ splitmix64(window_id + 0x632be59bd9b4e019ULL));
}

/// Independent sub-stream of a window (profiles, slots, evaluation, ...).
enum class Stream : std::uint64_t { profiles = 1, window_slots = 2, evaluation = 3, correlated = 4 };

inline Rng make_stream(std::uint64_t window_seed, Stream s) {
  return Rng(splitmix64(window_seed ^ (static_cast<std::uint64_t>(s) * 0xd1b54a32d192ed03ULL)));
}

}  // namespace ccofdma
