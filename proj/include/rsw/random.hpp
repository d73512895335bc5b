#ifndef RSW_RANDOM_HPP
#define RSW_RANDOM_HPP

#include <cstdint>
#include <random>

namespace rsw {

/// Disjoint stream families. The chain and Brownian families never share a
/// seed, so the switching path is independent of the driving noise.
enum class StreamKind : std::uint64_t { Chain = 1, Noise = 2, Auxiliary = 3, Bootstrap = 4 };

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based seed derivation: (master, kind, index) -> 64-bit seed.
/// Any trajectory's streams can be rebuilt from its index alone.
constexpr std::uint64_t derive_seed(std::uint64_t master, StreamKind kind, std::uint64_t index) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ (static_cast<std::uint64_t>(kind) * 0xD1B54A32D192ED03ULL));
  return splitmix64(h ^ splitmix64(index));
}

using Engine = std::mt19937_64;

inline Engine make_stream(std::uint64_t master, StreamKind kind, std::uint64_t index) {
  return Engine(derive_seed(master, kind, index));
}

}  // namespace rsw

#endif  // RSW_RANDOM_HPP
