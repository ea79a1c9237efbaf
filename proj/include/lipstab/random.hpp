#pragma once

#include <cstdint>
#include <random>

#include "lipstab/norm.hpp"

namespace lipstab {

/// SplitMix64 finaliser; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return mix64(mix64(mix64(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

/// Seeded generator with the handful of draws the library needs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }
  /// Standard normal via Box-Muller.
  double normal();

  Vec normal_vector(int n);
  /// Uniform on the unit sphere of `kind`. L1 and LInf use the face
  /// decomposition: pick a facet (all have equal area), then a uniform
  /// point on it.
  Vec sphere(int n, NormKind kind);
  /// Uniform in the unit ball of `kind`.
  Vec ball(int n, NormKind kind);

 private:
  std::mt19937_64 engine_;
};

}  // namespace lipstab
