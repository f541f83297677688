#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace msgossip {

// All randomness in the simulator flows through this wrapper. std::mt19937_64
// has a standardized output sequence, and every draw below is implemented by
// hand, so identical seeds give bit-identical runs on any platform. The
// std::*_distribution classes are deliberately avoided: their algorithms are
// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform double in [0, 1), 53 random bits.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound), bound >= 1. Lemire multiply-shift.
  std::uint32_t uniform_int(std::uint32_t bound) {
    const std::uint64_t x = eng_() >> 32;
    return static_cast<std::uint32_t>((x * bound) >> 32);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Geometric on {1, 2, ...} with success probability p: number of attempts
  // until first success. p == 1 is exact and consumes no state.
  std::uint64_t geometric(double p) {
    if (p >= 1.0) return 1;
    const double u = uniform01();  // in [0, 1)
    return 1 + static_cast<std::uint64_t>(std::floor(std::log1p(-u) / std::log1p(-p)));
  }

 private:
  std::mt19937_64 eng_;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

// Derives independent, reproducible seed streams from a base seed and a list
// of tags (stream purpose, level, cell index, ...).
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = detail::splitmix64(base);
  for (std::uint64_t t : tags) s = detail::splitmix64(s ^ t);
  return s;
}

// Stream tags used across the library.
enum SeedTag : std::uint64_t {
  kSeedActivation = 0x101,
  kSeedTransport = 0x102,
  kSeedElection = 0x103,
  kSeedInitValues = 0x104,
  kSeedTargets = 0x105,
};

}  // namespace msgossip
