#include "lipstab/random.hpp"

#include <cmath>
#include <numbers>

namespace lipstab {

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vec Rng::normal_vector(int n) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = normal();
  return v;
}

Vec Rng::sphere(int n, NormKind kind) {
  Vec v(n);
  switch (kind) {
    case NormKind::Euclid: {
      double len = 0.0;
      while (len == 0.0) {
        v = normal_vector(n);
        len = v.norm();
      }
      return v / len;
    }
    case NormKind::LInf: {
      for (int i = 0; i < n; ++i) v[i] = uniform(-1.0, 1.0);
      const auto face = static_cast<int>(below(static_cast<std::uint64_t>(n)));
      v[face] = uniform() < 0.5 ? -1.0 : 1.0;
      return v;
    }
    case NormKind::L1: {
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        double u = uniform();
        while (u <= 0.0) u = uniform();
        v[i] = -std::log(u);
        total += v[i];
      }
      for (int i = 0; i < n; ++i) v[i] = (uniform() < 0.5 ? -v[i] : v[i]) / total;
      return v;
    }
  }
  return v;
}

Vec Rng::ball(int n, NormKind kind) {
  const Vec dir = sphere(n, kind);
  return std::pow(uniform(), 1.0 / n) * dir;
}

}  // namespace lipstab
