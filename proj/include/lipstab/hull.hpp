#pragma once

#include <vector>

#include "lipstab/lp.hpp"
#include "lipstab/model.hpp"

namespace lipstab {

/// Convex-combination weights over a generator list.
struct SimplexWeights {
  Vec lambda;

  double sum() const { return lambda.sum(); }
  std::vector<std::size_t> support(double tol = 0.0) const;
};

struct MinNormResult {
  SolveStatus status = SolveStatus::IterLimit;
  double value = 0.0;
  SimplexWeights weights;
  /// The minimizing hull point sum_t lambda_t p_t.
  Vec point;
  int iterations = 0;
};

/// min |sum_t lambda_t p_t| over the unit simplex, points given as columns.
///
/// Euclid runs Wolfe's min-norm-point algorithm; L1 and LInf solve an LP.
/// Ties are broken towards the lexicographically smallest support.
MinNormResult min_norm_point(const Mat& points, NormKind measure = NormKind::Euclid);

/// KKT residual of min |P lambda|^2 over the simplex at `lambda`.
double min_norm_kkt_residual(const Mat& points, const Vec& lambda);

/// min { |u|_* : (u, <u, anchor>) in co(generators) }, |.|_* the dual of
/// `norm`.
///
/// Works in lambda-space: minimize |sum lambda_t u_t|_* over the simplex
/// cut by sum lambda_t (<u_t, anchor> - alpha_t) = 0. The slice polytope is
/// enumerated exactly (single generators on the hyperplane and crossing
/// pairs), so the equality never has to be enforced numerically. Status
/// NoIntersection when the slice is empty.
MinNormResult min_norm_sliced_hull(const CharacteristicSet& generators, const Vec& anchor,
                                   NormSpec norm, double slice_tol = kFeasibilityTol);

struct RatioResult {
  /// sup over the hull of [<u, x> - alpha]_+ / |u|_*; +inf when some
  /// combination has u = 0 and alpha < 0.
  double value = 0.0;
  SimplexWeights weights;
  /// Dinkelbach levels rho_k (nondecreasing).
  std::vector<double> rho;
  /// Inner maxima F(rho_k) = max_lambda N - rho_k D (nonincreasing to 0).
  std::vector<double> inner_max;
  int inner_iterations = 0;
};

/// Dinkelbach iteration on the hull ratio. The concave inner problem is
/// solved by away-step Frank-Wolfe (Euclid) or an LP (L1, LInf).
RatioResult max_ratio_over_hull_detailed(const CharacteristicSet& generators, const Vec& x,
                                         NormSpec norm);

double max_ratio_over_hull(const CharacteristicSet& generators, const Vec& x, NormSpec norm);

}  // namespace lipstab
