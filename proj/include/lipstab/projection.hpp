#pragma once

#include "lipstab/lp.hpp"
#include "lipstab/model.hpp"

namespace lipstab {

/// Polyhedron {y : A y <= b}; row i of `a` is a constraint normal.
struct Polyhedron {
  Mat a;  // m x n
  Vec b;  // m

  static Polyhedron from(const LinearSystem& system);
  int dimension() const { return static_cast<int>(a.cols()); }
  Eigen::Index size() const { return a.rows(); }
};

struct Projection {
  SolveStatus status = SolveStatus::IterLimit;
  double distance = 0.0;
  Vec point;
  /// Euclid only: multipliers nu >= 0 with point = x - A' nu.
  Vec multipliers;
  int iterations = 0;
};

/// Nearest point of a polyhedron to `x` in the given norm.
///
/// Euclid runs the Goldfarb-Idnani dual active-set method on
/// min 1/2 |y - x|^2; L1 and LInf solve the epigraph LP. Status Infeasible
/// when the polyhedron is empty.
Projection project_polyhedron(const Vec& x, const Polyhedron& poly,
                              NormKind norm = NormKind::Euclid);

Projection project_polyhedron(const Vec& x, const LinearSystem& system);

}  // namespace lipstab
