// Reproducible random streams.
//
// Every stream is a std::mt19937_64 seeded with
//   splitmix64(splitmix64(splitmix64(master) ^ module) ^ index)
// so that a path's randomness depends only on (master seed, module id,
// path index) and never on scheduling.

#ifndef HOPROC_RNG_HPP_
#define HOPROC_RNG_HPP_

#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>

namespace hop {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Module ids used for stream derivation.
enum class StreamModule : std::uint64_t {
  RadialNoise = 1,
  JumpClock = 2,
  ChamberDraw = 3,
  Permutation = 4,
  Bessel = 5,
  Test = 6,
};

inline constexpr std::uint64_t derive_seed(std::uint64_t master, StreamModule module,
                                           std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(master) ^ static_cast<std::uint64_t>(module)) ^
                    index);
}

using Engine = std::mt19937_64;

inline Engine make_stream(std::uint64_t master, StreamModule module, std::uint64_t index) {
  return Engine(derive_seed(master, module, index));
}

// Ziggurat normal sampler; works with any standard engine.
using Normal = boost::random::normal_distribution<double>;

// Uniform on (0, 1), never exactly 0.
inline double open_uniform(Engine& g) {
  return (static_cast<double>(g() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace hop

#endif
