#pragma once

#include <string_view>
#include <vector>

#include "lipstab/norm.hpp"

namespace lipstab {

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterLimit, NoIntersection };

std::string_view to_string(SolveStatus status);

enum class Relation { LessEq, GreaterEq, Equal };

struct LinearConstraint {
  Vec coeffs;
  Relation relation = Relation::LessEq;
  double rhs = 0.0;
};

/// min <objective, x> subject to `constraints`. Variables are free unless
/// flagged in `nonnegative` (empty means all free).
struct LpProblem {
  Vec objective;
  std::vector<LinearConstraint> constraints;
  std::vector<bool> nonnegative;

  int variables() const { return static_cast<int>(objective.size()); }
  void add(Vec coeffs, Relation relation, double rhs) {
    constraints.push_back({std::move(coeffs), relation, rhs});
  }
};

struct LpOptions {
  int max_iterations = 100000;
  /// Allowed constraint violation of an Optimal point.
  double tolerance = 1e-9;
};

struct LpResult {
  SolveStatus status = SolveStatus::IterLimit;
  Vec x;
  double objective = 0.0;
  int iterations = 0;
  /// Optimal: constraint multipliers, sign convention of the Lagrangian
  /// c - sum_i y_i g_i = 0. Infeasible: phase-one multipliers (Farkas
  /// certificate).
  Vec duals;
  /// Unbounded: a feasible direction along which the objective decreases.
  Vec ray;
};

/// Dense two-phase revised simplex with an explicit basis inverse, Dantzig
/// pricing and a Bland fallback once degenerate pivots pile up.
LpResult lp_solve(const LpProblem& problem, const LpOptions& options = {});

LpResult lp_solve(const Vec& objective, const std::vector<LinearConstraint>& constraints,
                  const LpOptions& options = {});

}  // namespace lipstab
