#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lipstab/hull.hpp"
#include "lipstab/model.hpp"

namespace lipstab {

/// Strong Slater condition verdicts from two routes: the margin LP
/// (min s with <a_t, x> - b_t <= s) and the hull gap (min-norm point of
/// co{(a_t, b_t)} in R^{n+1}).
struct SSCReport {
  bool holds = false;
  /// sigma(0) has a solution (LP margin <= tol).
  bool consistent = true;
  std::optional<Vec> slater_point;
  /// sup_t (<a_t, x_hat> - b_t) at the LP witness; the LP floors it at -1.
  double margin = 0.0;
  double hull_gap = 0.0;
  bool lp_verdict = false;
  bool hull_verdict = false;
  /// The two routes were both within a few tolerances of the boundary.
  bool borderline = false;
};

/// Throws InternalError when the routes disagree decisively on a consistent
/// system. On an inconsistent system the hull route is reported but not
/// compared: (0, 0) in the hull characterises SSC failure only when
/// sigma(0) is solvable.
SSCReport check_ssc(const LinearSystem& system, double tol = kFeasibilityTol);

enum class Regime { SlaterPoint, Regular, SSCFails };

std::string_view to_string(Regime regime);

/// Exact Lipschitzian bound of the feasible-set map at (0, anchor).
struct LipReport {
  double bound = 0.0;
  Regime regime = Regime::SlaterPoint;
  /// u* = sum lambda_t a_t attaining the slice minimum (Regular only).
  std::optional<Vec> minimizer;
  SimplexWeights slice_weights;
  std::vector<std::string> notes;
};

/// Throws InfeasibleAnchor when the anchor violates sigma(0) by more than
/// `tol`. Partition-independent: only C(0) enters.
LipReport lip_bound(const LinearSystem& system, const Vec& anchor, double tol = kFeasibilityTol);

/// dist(x; F_J(p)) through the sup-ratio over C_J(p). Throws SSCViolated
/// when sigma_J(p) fails the strong Slater condition.
double distance_formula(const LinearSystem& system, const BlockPartition& partition,
                        const Perturbation& p, const Vec& x, double tol = kFeasibilityTol);

struct CoderivCertificate {
  /// mu_t >= 0 per row.
  Vec cone_weights;
  /// p*_j = -sum_{t in T_j} mu_t.
  Vec p_star;
  /// x* = -sum_t mu_t a_t.
  Vec x_star;
  /// Sup-norm gap between (p*, -x*, -<x*, anchor>) and sum mu_t (-delta_j, a_t, b_t).
  double anchor_residual = 0.0;
};

struct MembershipResult {
  bool member = false;
  /// Smallest L1 residual of the cone equations reached by the LP.
  double residual = 0.0;
  std::optional<CoderivCertificate> certificate;
};

/// Decides p* in D*F_J(0, anchor)(x*) by LP feasibility over the finitely
/// generated cone.
MembershipResult coderivative_member(const LinearSystem& system, const BlockPartition& partition,
                                     const Vec& anchor, const Vec& p_star, const Vec& x_star,
                                     double tol = kFeasibilityTol);

struct CoderivNormResult {
  double value = 0.0;
  /// Maximising mu (empty when the value is infinite or zero).
  Vec cone_weights;
};

/// sup { sum mu_t : mu >= 0, |sum mu_t a_t|_* <= 1,
///       sum mu_t (<a_t, anchor> - b_t) = 0 }.
///
/// Euclid solves the conic program through its dual, the projection of the
/// origin onto {z : <a_t, z> >= 1, t active}, and rescales the projection
/// multipliers into mu. L1 and LInf solve the program as an LP.
CoderivNormResult coderivative_norm_detailed(const LinearSystem& system,
                                             const BlockPartition& partition, const Vec& anchor,
                                             double tol = kFeasibilityTol);

double coderivative_norm(const LinearSystem& system, const BlockPartition& partition,
                         const Vec& anchor, double tol = kFeasibilityTol);

struct EpsActiveResult {
  std::vector<std::size_t> indices;
  std::vector<std::string> labels;
  /// Bound computed from co{(a_t, b_t) : t in T_eps} only.
  LipReport report;
  double full_bound = 0.0;
  bool matches_full = false;
};

/// T_eps(anchor) = {t : <a_t, anchor> >= b_t - eps} and the bound restricted
/// to it.
EpsActiveResult eps_active(const LinearSystem& system, const Vec& anchor, double eps,
                           double tol = kFeasibilityTol);

/// Shared note for reports on finite truncations of infinite systems.
inline constexpr std::string_view kTruncationNote =
    "truncation: bound may underestimate the infinite system's modulus";

}  // namespace lipstab
