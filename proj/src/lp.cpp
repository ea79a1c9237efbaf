#include "lipstab/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lipstab/errors.hpp"

namespace lipstab {

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal:
      return "Optimal";
    case SolveStatus::Infeasible:
      return "Infeasible";
    case SolveStatus::Unbounded:
      return "Unbounded";
    case SolveStatus::IterLimit:
      return "IterLimit";
    case SolveStatus::NoIntersection:
      return "NoIntersection";
  }
  return "?";
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-10;
constexpr int kRefactorEvery = 64;
constexpr int kDegenerateLimit = 30;

enum class PhaseOutcome { Optimal, Unbounded, IterLimit };

// Standard form: min c'x, Ax = b, x >= 0, b >= 0. Columns are laid out as
// [structural | slack/surplus | artificial].
class RevisedSimplex {
 public:
  RevisedSimplex(const LpProblem& problem, const LpOptions& options)
      : problem_(problem), options_(options) {
    build();
  }

  LpResult solve() {
    LpResult result;

    // Phase one: minimise the sum of artificials.
    Vec phase_one = Vec::Zero(cols_);
    for (int j = first_art_; j < cols_; ++j) phase_one[j] = 1.0;
    PhaseOutcome outcome = run(phase_one, false);
    result.iterations = iterations_;
    if (outcome == PhaseOutcome::IterLimit) {
      result.status = SolveStatus::IterLimit;
      return result;
    }
    double infeasibility = 0.0;
    for (int r = 0; r < rows_; ++r) {
      if (basis_[r] >= first_art_) infeasibility += std::max(0.0, xb_[r]);
    }
    const double scale = 1.0 + (rows_ ? b_.lpNorm<Eigen::Infinity>() : 0.0);
    if (infeasibility > options_.tolerance * scale) {
      result.status = SolveStatus::Infeasible;
      result.duals = original_duals(phase_one);
      return result;
    }
    drive_out_artificials();

    outcome = run(cost_, true);
    result.iterations = iterations_;
    if (outcome == PhaseOutcome::IterLimit) {
      result.status = SolveStatus::IterLimit;
      return result;
    }
    if (outcome == PhaseOutcome::Unbounded) {
      result.status = SolveStatus::Unbounded;
      result.ray = original_ray();
      result.x = original_point();
      return result;
    }
    result.status = SolveStatus::Optimal;
    result.x = original_point();
    result.objective = problem_.objective.dot(result.x);
    result.duals = original_duals(cost_);
    return result;
  }

 private:
  void build() {
    const int n = problem_.variables();
    rows_ = static_cast<int>(problem_.constraints.size());
    const bool all_free = problem_.nonnegative.empty();

    for (int v = 0; v < n; ++v) {
      const bool nonneg = !all_free && problem_.nonnegative[v];
      col_var_.push_back(v);
      col_sign_.push_back(1.0);
      if (!nonneg) {
        col_var_.push_back(v);
        col_sign_.push_back(-1.0);
      }
    }
    structural_ = static_cast<int>(col_var_.size());

    row_sign_.assign(rows_, 1.0);
    std::vector<int> slack_of_row(rows_, -1);
    std::vector<double> slack_coef(rows_, 0.0);
    int slacks = 0;
    for (int i = 0; i < rows_; ++i) {
      const auto& con = problem_.constraints[i];
      if (con.rhs < 0) row_sign_[i] = -1.0;
      if (con.relation != Relation::Equal) {
        slack_of_row[i] = structural_ + slacks++;
        const double base = con.relation == Relation::LessEq ? 1.0 : -1.0;
        slack_coef[i] = base * row_sign_[i];
      }
    }
    first_art_ = structural_ + slacks;

    // Rows whose slack enters with +1 start with the slack basic.
    std::vector<int> art_of_row(rows_, -1);
    int arts = 0;
    for (int i = 0; i < rows_; ++i) {
      if (slack_coef[i] <= 0) art_of_row[i] = first_art_ + arts++;
    }
    cols_ = first_art_ + arts;

    a_ = Mat::Zero(rows_, cols_);
    b_ = Vec::Zero(rows_);
    cost_ = Vec::Zero(cols_);
    for (int j = 0; j < structural_; ++j) {
      cost_[j] = col_sign_[j] * problem_.objective[col_var_[j]];
    }
    for (int i = 0; i < rows_; ++i) {
      const auto& con = problem_.constraints[i];
      if (con.coeffs.size() != n) throw ValidationError("LP constraint has wrong length");
      const double s = row_sign_[i];
      for (int j = 0; j < structural_; ++j) {
        a_(i, j) = s * col_sign_[j] * con.coeffs[col_var_[j]];
      }
      b_[i] = s * con.rhs;
      if (slack_of_row[i] >= 0) a_(i, slack_of_row[i]) = slack_coef[i];
      if (art_of_row[i] >= 0) a_(i, art_of_row[i]) = 1.0;
    }

    basis_.resize(rows_);
    is_basic_.assign(cols_, 0);
    for (int i = 0; i < rows_; ++i) {
      const int col = art_of_row[i] >= 0 ? art_of_row[i] : slack_of_row[i];
      basis_[i] = col;
      is_basic_[col] = 1;
    }
    binv_ = Mat::Identity(rows_, rows_);
    xb_ = b_;
  }

  void refactor() {
    Mat basis_matrix(rows_, rows_);
    for (int r = 0; r < rows_; ++r) basis_matrix.col(r) = a_.col(basis_[r]);
    binv_ = basis_matrix.partialPivLu().inverse();
    xb_ = binv_ * b_;
    for (int r = 0; r < rows_; ++r) {
      if (xb_[r] < 0 && xb_[r] > -options_.tolerance) xb_[r] = 0.0;
    }
    since_refactor_ = 0;
  }

  void pivot(int leave_row, int enter_col, const Vec& alpha, double theta) {
    xb_ -= theta * alpha;
    xb_[leave_row] = theta;
    const double piv = alpha[leave_row];
    binv_.row(leave_row) /= piv;
    for (int r = 0; r < rows_; ++r) {
      if (r != leave_row && alpha[r] != 0.0) binv_.row(r) -= alpha[r] * binv_.row(leave_row);
    }
    is_basic_[basis_[leave_row]] = 0;
    basis_[leave_row] = enter_col;
    is_basic_[enter_col] = 1;
    ++iterations_;
    if (++since_refactor_ >= kRefactorEvery) refactor();
  }

  Vec duals_for(const Vec& cost) const {
    Vec cb(rows_);
    for (int r = 0; r < rows_; ++r) cb[r] = cost[basis_[r]];
    return binv_.transpose() * cb;
  }

  PhaseOutcome run(const Vec& cost, bool phase_two) {
    int degenerate = 0;
    bool bland = false;
    while (true) {
      if (iterations_ >= options_.max_iterations) return PhaseOutcome::IterLimit;
      const Vec y = duals_for(cost);

      int enter = -1;
      double best = -kCostTol;
      for (int j = 0; j < first_art_; ++j) {
        if (is_basic_[j]) continue;
        const double d = cost[j] - y.dot(a_.col(j));
        const double threshold = -kCostTol * (1.0 + std::abs(cost[j]));
        if (d >= threshold) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (d < best) {
          best = d;
          enter = j;
        }
      }
      if (enter < 0) return PhaseOutcome::Optimal;

      const Vec alpha = binv_ * a_.col(enter);
      const double alpha_scale = std::max(1.0, alpha.lpNorm<Eigen::Infinity>());
      int leave = -1;
      double theta = std::numeric_limits<double>::infinity();
      for (int r = 0; r < rows_; ++r) {
        const bool artificial = basis_[r] >= first_art_;
        // A basic artificial (value ~0 after phase one) must not move.
        if (artificial && phase_two && std::abs(alpha[r]) > kPivotTol * alpha_scale) {
          if (theta > 0.0 || leave < 0) {
            theta = 0.0;
            leave = r;
          }
          continue;
        }
        if (alpha[r] <= kPivotTol * alpha_scale) continue;
        const double ratio = std::max(0.0, xb_[r]) / alpha[r];
        if (leave < 0 || ratio < theta - 1e-12) {
          theta = ratio;
          leave = r;
        } else if (ratio <= theta + 1e-12) {
          const bool prefer = bland ? basis_[r] < basis_[leave]
                                    : alpha[r] > alpha[leave];
          if (prefer) {
            theta = std::min(theta, ratio);
            leave = r;
          }
        }
      }
      if (leave < 0) {
        entering_ = enter;
        ray_alpha_ = alpha;
        return PhaseOutcome::Unbounded;
      }

      if (theta <= 1e-12) {
        if (++degenerate > kDegenerateLimit) bland = true;
      } else {
        degenerate = 0;
        bland = false;
      }
      pivot(leave, enter, alpha, theta);
    }
  }

  void drive_out_artificials() {
    for (int r = 0; r < rows_; ++r) {
      if (basis_[r] < first_art_) continue;
      const Eigen::RowVectorXd row = binv_.row(r);
      int best = -1;
      double best_abs = 1e-9;
      for (int j = 0; j < first_art_; ++j) {
        if (is_basic_[j]) continue;
        const double v = std::abs(row.dot(a_.col(j)));
        if (v > best_abs) {
          best_abs = v;
          best = j;
        }
      }
      if (best < 0) continue;  // redundant row
      const Vec alpha = binv_ * a_.col(best);
      pivot(r, best, alpha, xb_[r] / alpha[r]);
    }
    refactor();
  }

  Vec original_point() const {
    Vec x = Vec::Zero(problem_.variables());
    for (int r = 0; r < rows_; ++r) {
      const int col = basis_[r];
      if (col < structural_) x[col_var_[col]] += col_sign_[col] * xb_[r];
    }
    return x;
  }

  Vec original_ray() const {
    Vec ray = Vec::Zero(problem_.variables());
    if (entering_ < structural_) ray[col_var_[entering_]] += col_sign_[entering_];
    for (int r = 0; r < rows_; ++r) {
      const int col = basis_[r];
      if (col < structural_) ray[col_var_[col]] -= col_sign_[col] * ray_alpha_[r];
    }
    return ray;
  }

  Vec original_duals(const Vec& cost) const {
    Vec y = duals_for(cost);
    for (int i = 0; i < rows_; ++i) y[i] *= row_sign_[i];
    return y;
  }

  const LpProblem& problem_;
  LpOptions options_;
  int rows_ = 0;
  int cols_ = 0;
  int structural_ = 0;
  int first_art_ = 0;
  std::vector<int> col_var_;
  std::vector<double> col_sign_;
  std::vector<double> row_sign_;
  Mat a_;
  Vec b_;
  Vec cost_;
  std::vector<int> basis_;
  std::vector<char> is_basic_;
  Mat binv_;
  Vec xb_;
  int iterations_ = 0;
  int since_refactor_ = 0;
  int entering_ = -1;
  Vec ray_alpha_;
};

}  // namespace

LpResult lp_solve(const LpProblem& problem, const LpOptions& options) {
  if (!problem.nonnegative.empty() &&
      problem.nonnegative.size() != static_cast<std::size_t>(problem.variables())) {
    throw ValidationError("LP nonnegativity flags have wrong length");
  }
  return RevisedSimplex(problem, options).solve();
}

LpResult lp_solve(const Vec& objective, const std::vector<LinearConstraint>& constraints,
                  const LpOptions& options) {
  LpProblem problem{objective, constraints, {}};
  return lp_solve(problem, options);
}

}  // namespace lipstab
