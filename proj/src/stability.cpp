#include "lipstab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lipstab/errors.hpp"
#include "lipstab/lp.hpp"
#include "lipstab/projection.hpp"

namespace lipstab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Verdicts closer than this factor to the tolerance are not compared.
constexpr double kGrayBand = 100.0;

void require_anchor(const LinearSystem& system, const Vec& anchor, double tol) {
  if (anchor.size() != system.dimension()) {
    throw ValidationError("anchor has " + std::to_string(anchor.size()) + " entries, expected " +
                          std::to_string(system.dimension()));
  }
  if (!system.contains(anchor, tol)) {
    std::ostringstream msg;
    msg << "anchor violates the nominal system by " << system.max_residual(anchor);
    throw InfeasibleAnchor(msg.str());
  }
}

CharacteristicSet nominal_generators(const LinearSystem& system) {
  CharacteristicSet set;
  set.generators.reserve(system.size());
  for (const auto& row : system.rows()) set.generators.push_back({row.a, row.b});
  return set;
}

std::vector<std::size_t> active_rows(const LinearSystem& system, const Vec& anchor, double tol) {
  std::vector<std::size_t> active;
  for (std::size_t t = 0; t < system.size(); ++t) {
    if (std::abs(system.residual(t, anchor)) <= tol) active.push_back(t);
  }
  return active;
}

}  // namespace

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::SlaterPoint:
      return "SlaterPoint";
    case Regime::Regular:
      return "Regular";
    case Regime::SSCFails:
      return "SSCFails";
  }
  return "?";
}

SSCReport check_ssc(const LinearSystem& system, double tol) {
  validate(system).raise_if_failed();
  SSCReport out;
  const int n = system.dimension();
  if (system.empty()) {
    out.holds = out.lp_verdict = out.hull_verdict = true;
    out.slater_point = Vec::Zero(n);
    out.margin = -1.0;
    out.hull_gap = kInf;
    return out;
  }

  // min s  s.t.  <a_t, x> - s <= b_t,  s >= -1.
  LpProblem lp;
  lp.objective = Vec::Zero(n + 1);
  lp.objective[n] = 1.0;
  for (const auto& row : system.rows()) {
    Vec c(n + 1);
    c.head(n) = row.a;
    c[n] = -1.0;
    lp.add(std::move(c), Relation::LessEq, row.b);
  }
  Vec floor = Vec::Zero(n + 1);
  floor[n] = 1.0;
  lp.add(std::move(floor), Relation::GreaterEq, -1.0);
  const LpResult res = lp_solve(lp);
  if (res.status != SolveStatus::Optimal) {
    throw InternalError("margin LP ended with status " + std::string(to_string(res.status)));
  }
  const Vec x_hat = res.x.head(n);
  out.margin = system.max_residual(x_hat);
  out.lp_verdict = out.margin < -tol;
  out.consistent = out.margin <= tol;
  if (out.lp_verdict) out.slater_point = x_hat;

  Mat points(n + 1, static_cast<Eigen::Index>(system.size()));
  for (std::size_t t = 0; t < system.size(); ++t) {
    points.col(static_cast<Eigen::Index>(t)).head(n) = system.row(t).a;
    points(n, static_cast<Eigen::Index>(t)) = system.row(t).b;
  }
  const MinNormResult hull = min_norm_point(points, NormKind::Euclid);
  if (hull.status != SolveStatus::Optimal) {
    throw InternalError("min-norm point ended with status " + std::string(to_string(hull.status)));
  }
  // Below the round-off floor of the generators the gap is zero.
  const double scale = points.colwise().norm().maxCoeff();
  out.hull_gap = hull.value <= 64 * std::numeric_limits<double>::epsilon() * scale ? 0.0 : hull.value;
  out.hull_verdict = out.hull_gap > tol;
  out.holds = out.lp_verdict;

  const bool lp_decisive = std::abs(out.margin) > kGrayBand * tol;
  const bool hull_decisive = out.hull_gap > kGrayBand * tol || out.hull_gap < tol / kGrayBand;
  out.borderline = !lp_decisive || !hull_decisive;
  if (out.consistent && !out.borderline && out.lp_verdict != out.hull_verdict) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "strong Slater routes disagree: margin " << out.margin << ", hull gap " << out.hull_gap;
    throw InternalError(msg.str());
  }
  return out;
}

LipReport lip_bound(const LinearSystem& system, const Vec& anchor, double tol) {
  validate(system).raise_if_failed();
  require_anchor(system, anchor, tol);
  LipReport out;
  if (!system.truncation_note().empty()) out.notes.emplace_back(kTruncationNote);
  out.slice_weights.lambda = Vec::Zero(static_cast<Eigen::Index>(system.size()));
  if (system.empty()) return out;

  if (!check_ssc(system, tol).holds) {
    out.regime = Regime::SSCFails;
    out.bound = kInf;
    return out;
  }
  const MinNormResult slice = min_norm_sliced_hull(nominal_generators(system), anchor, system.norm(), tol);
  if (slice.status == SolveStatus::NoIntersection) return out;
  if (slice.status != SolveStatus::Optimal) {
    throw NonConvergent("sliced min-norm ended with status " + std::string(to_string(slice.status)));
  }
  out.slice_weights = slice.weights;
  if (slice.value <= 0.0) {
    out.regime = Regime::SSCFails;
    out.bound = kInf;
    return out;
  }
  out.regime = Regime::Regular;
  out.bound = 1.0 / slice.value;
  out.minimizer = slice.point;
  return out;
}

double distance_formula(const LinearSystem& system, const BlockPartition& partition,
                        const Perturbation& p, const Vec& x, double tol) {
  validate(system, partition, p).raise_if_failed();
  if (x.size() != system.dimension()) throw ValidationError("point dimension disagrees with the system");
  if (!check_ssc(perturbed_system(system, partition, p), tol).holds) {
    throw SSCViolated("perturbed system fails the strong Slater condition");
  }
  return max_ratio_over_hull(characteristic_generators(system, partition, p), x, system.norm());
}

MembershipResult coderivative_member(const LinearSystem& system, const BlockPartition& partition,
                                     const Vec& anchor, const Vec& p_star, const Vec& x_star,
                                     double tol) {
  validate(system, partition).raise_if_failed();
  require_anchor(system, anchor, tol);
  const auto row_block = partition.row_blocks(system);
  const auto m = static_cast<Eigen::Index>(system.size());
  const auto k = static_cast<Eigen::Index>(partition.size());
  const int n = system.dimension();
  if (p_star.size() != k || x_star.size() != n) {
    throw ValidationError("p* needs one entry per block and x* one per coordinate");
  }

  // Equations E mu = target, one per block, coordinate and the anchor row.
  const Eigen::Index eqs = k + n + 1;
  Mat e = Mat::Zero(eqs, m);
  for (Eigen::Index t = 0; t < m; ++t) {
    const auto& row = system.row(static_cast<std::size_t>(t));
    e(static_cast<Eigen::Index>(row_block[static_cast<std::size_t>(t)]), t) = -1.0;
    e.block(k, t, n, 1) = row.a;
    e(k + n, t) = row.b;
  }
  Vec target(eqs);
  target.head(k) = p_star;
  target.segment(k, n) = -x_star;
  target[k + n] = -x_star.dot(anchor);

  // Variables mu (m), r+ (eqs), r- (eqs), all >= 0; minimise the L1 residual.
  const Eigen::Index vars = m + 2 * eqs;
  LpProblem lp;
  lp.objective = Vec::Zero(vars);
  lp.objective.tail(2 * eqs).setOnes();
  lp.nonnegative.assign(static_cast<std::size_t>(vars), true);
  for (Eigen::Index i = 0; i < eqs; ++i) {
    Vec c = Vec::Zero(vars);
    c.head(m) = e.row(i).transpose();
    c[m + i] = 1.0;
    c[m + eqs + i] = -1.0;
    lp.add(std::move(c), Relation::Equal, target[i]);
  }
  const LpResult res = lp_solve(lp);
  if (res.status != SolveStatus::Optimal) {
    throw InternalError("membership LP ended with status " + std::string(to_string(res.status)));
  }

  MembershipResult out;
  out.residual = std::max(0.0, res.objective);
  out.member = out.residual <= tol * (1.0 + target.lpNorm<Eigen::Infinity>());
  if (!out.member) return out;

  CoderivCertificate cert;
  cert.cone_weights = res.x.head(m).cwiseMax(0.0);
  const Vec induced = e * cert.cone_weights;
  cert.p_star = induced.head(k);
  cert.x_star = -induced.segment(k, n);
  cert.anchor_residual = (induced - target).lpNorm<Eigen::Infinity>();
  out.certificate = std::move(cert);
  return out;
}

CoderivNormResult coderivative_norm_detailed(const LinearSystem& system,
                                             const BlockPartition& partition, const Vec& anchor,
                                             double tol) {
  validate(system, partition).raise_if_failed();
  require_anchor(system, anchor, tol);
  CoderivNormResult out;
  // Rows off the anchor's hyperplane get mu_t = 0 from the slice equation,
  // since every residual is <= 0 at a feasible anchor.
  const auto active = active_rows(system, anchor, tol);
  if (active.empty()) return out;
  if (!check_ssc(system, tol).holds) {
    out.value = kInf;
    return out;
  }
  const int n = system.dimension();
  const auto k = static_cast<Eigen::Index>(active.size());

  if (system.norm().kind == NormKind::Euclid) {
    // max 1'mu s.t. |A mu| <= 1 equals min{|z| : A'z >= 1}; at the projection
    // z = A nu of the origin, mu = nu / |z|.
    Polyhedron poly{Mat(k, n), Vec::Constant(k, -1.0)};
    for (Eigen::Index i = 0; i < k; ++i) poly.a.row(i) = -system.row(active[static_cast<std::size_t>(i)]).a.transpose();
    const Projection proj = project_polyhedron(Vec::Zero(n), poly, NormKind::Euclid);
    if (proj.status == SolveStatus::Infeasible) {
      out.value = kInf;
      return out;
    }
    if (proj.status != SolveStatus::Optimal) {
      throw NonConvergent("dual projection ended with status " + std::string(to_string(proj.status)));
    }
    out.value = proj.distance;
    out.cone_weights = Vec::Zero(static_cast<Eigen::Index>(system.size()));
    if (proj.distance > 0.0) {
      for (Eigen::Index i = 0; i < k; ++i) {
        out.cone_weights[static_cast<Eigen::Index>(active[static_cast<std::size_t>(i)])] =
            proj.multipliers[i] / proj.distance;
      }
    }
    return out;
  }

  // Polyhedral dual norm: LP in mu (k), plus w (n) for an L1 dual norm.
  const bool l1_dual = system.norm().dual_kind() == NormKind::L1;
  const Eigen::Index vars = k + (l1_dual ? n : 0);
  LpProblem lp;
  lp.objective = Vec::Zero(vars);
  lp.objective.head(k).setConstant(-1.0);
  lp.nonnegative.assign(static_cast<std::size_t>(vars), true);
  for (int i = 0; i < n; ++i) {
    Vec up = Vec::Zero(vars);
    for (Eigen::Index j = 0; j < k; ++j) up[j] = system.row(active[static_cast<std::size_t>(j)]).a[i];
    Vec down = -up;
    if (l1_dual) {
      up[k + i] = -1.0;
      down[k + i] = -1.0;
      lp.add(std::move(up), Relation::LessEq, 0.0);
      lp.add(std::move(down), Relation::LessEq, 0.0);
    } else {
      lp.add(std::move(up), Relation::LessEq, 1.0);
      lp.add(std::move(down), Relation::LessEq, 1.0);
    }
  }
  if (l1_dual) {
    Vec budget = Vec::Zero(vars);
    budget.tail(n).setOnes();
    lp.add(std::move(budget), Relation::LessEq, 1.0);
  }
  const LpResult res = lp_solve(lp);
  if (res.status == SolveStatus::Unbounded) {
    out.value = kInf;
    return out;
  }
  if (res.status != SolveStatus::Optimal) {
    throw InternalError("coderivative LP ended with status " + std::string(to_string(res.status)));
  }
  out.value = std::max(0.0, -res.objective);
  out.cone_weights = Vec::Zero(static_cast<Eigen::Index>(system.size()));
  for (Eigen::Index j = 0; j < k; ++j) {
    out.cone_weights[static_cast<Eigen::Index>(active[static_cast<std::size_t>(j)])] = std::max(0.0, res.x[j]);
  }
  return out;
}

double coderivative_norm(const LinearSystem& system, const BlockPartition& partition,
                         const Vec& anchor, double tol) {
  return coderivative_norm_detailed(system, partition, anchor, tol).value;
}

EpsActiveResult eps_active(const LinearSystem& system, const Vec& anchor, double eps, double tol) {
  if (!(eps >= 0.0)) throw ValidationError("eps must be nonnegative");
  validate(system).raise_if_failed();
  require_anchor(system, anchor, tol);
  EpsActiveResult out;
  std::vector<Row> rows;
  for (std::size_t t = 0; t < system.size(); ++t) {
    const auto& row = system.row(t);
    if (row.a.dot(anchor) >= row.b - eps) {
      out.indices.push_back(t);
      out.labels.push_back(row.label);
      rows.push_back(row);
    }
  }
  out.report = lip_bound(system.with_rows(std::move(rows)), anchor, tol);
  out.full_bound = lip_bound(system, anchor, tol).bound;
  const double a = out.report.bound;
  const double b = out.full_bound;
  out.matches_full = (std::isinf(a) && std::isinf(b)) ||
                     std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b));
  return out;
}

}  // namespace lipstab
