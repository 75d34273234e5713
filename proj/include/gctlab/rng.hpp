#ifndef GCTLAB_RNG_HPP
#define GCTLAB_RNG_HPP

#include <cstdint>
#include <random>

namespace gctlab {

/// splitmix64 step; used to decorrelate seeds.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Counter-based per-replication seed: independent of scheduling order.
inline uint64_t derive_seed(uint64_t master, uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index * 0x9e3779b97f4a7c15ull + 1));
}

inline std::mt19937_64 make_rng(uint64_t seed) { return std::mt19937_64(splitmix64(seed)); }

inline std::mt19937_64 make_rng(uint64_t master, uint64_t index) {
  return std::mt19937_64(derive_seed(master, index));
}

/// Uniform draw in [0,1).
inline double uniform01(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace gctlab

#endif  // GCTLAB_RNG_HPP
