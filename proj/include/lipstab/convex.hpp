#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lipstab/model.hpp"
#include "lipstab/stability.hpp"

namespace lipstab {

/// x -> <c, x> + d
struct Affine {
  Vec c;
  double d = 0.0;
};

/// x -> 1/2 <Qx, x> + <c, x> + r, Q symmetric positive definite.
struct Quadratic {
  Mat q;
  Vec c;
  double r = 0.0;
};

/// x -> max_i <c_i, x> + d_i. Subgradients use the first maximising piece.
struct MaxAffine {
  std::vector<Affine> pieces;
};

/// x -> kappa |x - shift| + r in the decision-space norm.
struct ScaledNorm {
  double kappa = 1.0;
  Vec shift;
  double r = 0.0;
  NormKind norm = NormKind::Euclid;
};

using FunctionClass = std::variant<Affine, Quadratic, MaxAffine, ScaledNorm>;

struct ConvexFunction {
  std::string block;
  FunctionClass f;

  int dimension() const;
  std::string_view class_name() const;
};

/// Convex system {f_j(x) <= p_j, j in J}; each function is its own block.
struct ConvexSystem {
  int dimension = 0;
  NormSpec norm;
  std::vector<ConvexFunction> functions;
  std::string truncation_note;
};

ConvexFunction make_affine(std::string block, Vec c, double d);
ConvexFunction make_quadratic(std::string block, Mat q, Vec c, double r);
ConvexFunction make_max_affine(std::string block, std::vector<Affine> pieces);
ConvexFunction make_scaled_norm(std::string block, double kappa, Vec shift, double r,
                                NormKind norm = NormKind::Euclid);

/// Dimensions, labels, kappa > 0 and positive definiteness of Q (by
/// Cholesky).
ValidationReport validate(const ConvexSystem& system);

struct Subgradient {
  double value = 0.0;
  Vec u;
};

/// f(x) and one u in the subdifferential at x, with f(x) + f*(u) = <u, x>.
Subgradient eval_sub(const ConvexFunction& fn, const Vec& x);

/// f*(u) in closed form (an LP for MaxAffine); +inf outside dom f*.
double conjugate_value(const ConvexFunction& fn, const Vec& u);

/// A point (u, f_j*(u)) of gph f_j*.
struct ConjugateSample {
  std::size_t block = 0;
  Vec u;
  double value = 0.0;
  /// Sample point x with u in the subdifferential of f_j at x.
  std::optional<Vec> provenance;
};

/// Rows <u, x> <= f_j*(u), one per distinct cut, blocked by function.
struct LinearizedSystem {
  LinearSystem system;
  BlockPartition partition;
  /// samples[t] produced row t.
  std::vector<ConjugateSample> samples;
};

struct LinearizeConfig {
  /// Maximum number of sample points per function.
  std::size_t budget = 64;
  /// Sample radii around the anchor, cycled in order.
  std::vector<double> radii{1.0, 1e-1, 1e-2};
  std::uint64_t seed = 0;
};

/// Cuts at the anchor and at budget - 1 seeded random points around it. The
/// random points of a smaller budget are a prefix of those of a larger one.
LinearizedSystem linearize(const ConvexSystem& system, const LinearizeConfig& cfg, const Vec& anchor);

/// Cuts at explicit points, `points[j]` for function j. Cuts whose u is
/// within 1e-12 of an earlier cut of the same function are dropped.
LinearizedSystem linearize_at(const ConvexSystem& system, const std::vector<std::vector<Vec>>& points);

struct ConvexLipReport {
  LipReport report;
  /// Bound after each refinement step (nondecreasing).
  std::vector<double> history;
  bool converged = false;
  /// |last - previous| of the bound history.
  double gap = 0.0;
  std::size_t cuts = 0;
  /// Range of |u|_* over the sampled conjugate points.
  double min_generator_norm = 0.0;
  double max_generator_norm = 0.0;
};

/// Lower estimate of the exact bound of the convex system from sampled
/// cuts, refined until two successive steps change it by less than 1e-4
/// relative or a function's sample budget runs out (converged = false).
/// Throws InfeasibleAnchor when some f_j(anchor) > tol.
ConvexLipReport lip_bound_convex(const ConvexSystem& system, const Vec& anchor,
                                 const LinearizeConfig& cfg = {}, double tol = kFeasibilityTol);

struct ConvexDistance {
  double distance = 0.0;
  Vec point;
  std::size_t cuts = 0;
  int iterations = 0;
};

struct KelleyConfig {
  double violation_tol = 1e-8;
  std::size_t max_cuts = 500;
};

/// dist(x; {y : f_j(y) <= p_j}) by cutting planes. Throws InfeasibleSystem
/// when a relaxation is empty and NonConvergent at the cut cap.
ConvexDistance distance_convex(const ConvexSystem& system, const Vec& p, const Vec& x,
                               const KelleyConfig& cfg = {});

}  // namespace lipstab
