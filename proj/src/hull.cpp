#include "lipstab/hull.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "lipstab/errors.hpp"

namespace lipstab {

std::vector<std::size_t> SimplexWeights::support(double tol) const {
  std::vector<std::size_t> idx;
  for (Eigen::Index t = 0; t < lambda.size(); ++t) {
    if (lambda[t] > tol) idx.push_back(static_cast<std::size_t>(t));
  }
  return idx;
}

namespace {

constexpr int kWolfeMaxIter = 100000;

// Weights alpha with sum 1 minimising |P_S alpha|.
Vec affine_minimizer(const Mat& points, const std::vector<Eigen::Index>& corral) {
  const auto k = static_cast<Eigen::Index>(corral.size());
  Mat ps(points.rows(), k);
  for (Eigen::Index i = 0; i < k; ++i) ps.col(i) = points.col(corral[static_cast<std::size_t>(i)]);
  Mat kkt = Mat::Zero(k + 1, k + 1);
  kkt.topLeftCorner(k, k) = ps.transpose() * ps;
  kkt.block(0, k, k, 1).setOnes();
  kkt.block(k, 0, 1, k).setOnes();
  Vec rhs = Vec::Zero(k + 1);
  rhs[k] = 1.0;
  Vec sol = kkt.completeOrthogonalDecomposition().solve(rhs);
  Vec alpha = sol.head(k);
  const double s = alpha.sum();
  if (s != 0.0) alpha /= s;
  return alpha;
}

MinNormResult wolfe(const Mat& points) {
  MinNormResult out;
  const Eigen::Index k = points.cols();
  Vec sq = points.colwise().squaredNorm().transpose();
  const double max_sq = sq.maxCoeff();
  out.weights.lambda = Vec::Zero(k);

  Eigen::Index start = 0;
  for (Eigen::Index t = 1; t < k; ++t) {
    if (sq[t] < sq[start]) start = t;
  }
  std::vector<Eigen::Index> corral{start};
  std::vector<double> lam{1.0};
  Vec x = points.col(start);

  auto rebuild = [&]() {
    x.setZero(points.rows());
    for (std::size_t i = 0; i < corral.size(); ++i) x += lam[i] * points.col(corral[i]);
  };

  int iter = 0;
  bool converged = false;
  while (iter < kWolfeMaxIter) {
    ++iter;
    const double xx = x.squaredNorm();
    if (xx <= 1e-28 * std::max(max_sq, 1e-300)) {
      converged = true;
      break;
    }
    const Vec dots = points.transpose() * x;
    Eigen::Index j = 0;
    for (Eigen::Index t = 1; t < k; ++t) {
      if (dots[t] < dots[j]) j = t;
    }
    if (xx - dots[j] <= 1e-14 * max_sq) {
      converged = true;
      break;
    }
    if (std::find(corral.begin(), corral.end(), j) != corral.end()) {
      converged = true;
      break;
    }
    corral.push_back(j);
    lam.push_back(0.0);

    while (true) {
      const Vec alpha = affine_minimizer(points, corral);
      bool interior = true;
      for (Eigen::Index i = 0; i < alpha.size(); ++i) interior = interior && alpha[i] > 1e-14;
      if (interior) {
        for (std::size_t i = 0; i < lam.size(); ++i) lam[i] = alpha[static_cast<Eigen::Index>(i)];
        rebuild();
        break;
      }
      double theta = 1.0;
      std::optional<std::size_t> hit;
      for (std::size_t i = 0; i < lam.size(); ++i) {
        const double a = alpha[static_cast<Eigen::Index>(i)];
        if (a <= 1e-14 && lam[i] - a > 0.0) {
          const double th = lam[i] / (lam[i] - a);
          if (th < theta) {
            theta = th;
            hit = i;
          }
        }
      }
      // Tiny positive weights block nothing: take the affine minimiser and
      // let the pruning below drop them.
      for (std::size_t i = 0; i < lam.size(); ++i) {
        lam[i] = std::max(0.0, theta * alpha[static_cast<Eigen::Index>(i)] + (1.0 - theta) * lam[i]);
      }
      if (hit) lam[*hit] = 0.0;
      std::vector<Eigen::Index> keep_c;
      std::vector<double> keep_l;
      for (std::size_t i = 0; i < lam.size(); ++i) {
        if (lam[i] > 1e-14) {
          keep_c.push_back(corral[i]);
          keep_l.push_back(lam[i]);
        }
      }
      corral = std::move(keep_c);
      lam = std::move(keep_l);
      const double s = std::accumulate(lam.begin(), lam.end(), 0.0);
      for (auto& l : lam) l /= s;
      rebuild();
      if (corral.size() <= 1) break;
    }
  }

  for (std::size_t i = 0; i < corral.size(); ++i) out.weights.lambda[corral[i]] = lam[i];
  out.point = x;
  out.value = x.norm();
  out.iterations = iter;
  out.status = converged ? SolveStatus::Optimal : SolveStatus::IterLimit;
  return out;
}

MinNormResult min_norm_lp(const Mat& points, NormKind measure) {
  const auto d = static_cast<int>(points.rows());
  const auto k = static_cast<int>(points.cols());
  const int extra = measure == NormKind::L1 ? d : 1;
  LpProblem lp;
  lp.objective = Vec::Zero(k + extra);
  lp.objective.tail(extra).setOnes();
  lp.nonnegative.assign(static_cast<std::size_t>(k + extra), true);
  for (int i = 0; i < d; ++i) {
    const int e = measure == NormKind::L1 ? k + i : k;
    Vec up = Vec::Zero(k + extra);
    up.head(k) = points.row(i).transpose();
    up[e] = -1.0;
    lp.add(up, Relation::LessEq, 0.0);
    Vec down = Vec::Zero(k + extra);
    down.head(k) = -points.row(i).transpose();
    down[e] = -1.0;
    lp.add(down, Relation::LessEq, 0.0);
  }
  Vec sum = Vec::Zero(k + extra);
  sum.head(k).setOnes();
  lp.add(sum, Relation::Equal, 1.0);
  const LpResult res = lp_solve(lp);
  MinNormResult out;
  out.status = res.status;
  out.iterations = res.iterations;
  if (res.status != SolveStatus::Optimal) return out;
  out.weights.lambda = res.x.head(k).cwiseMax(0.0);
  out.weights.lambda /= out.weights.lambda.sum();
  out.point = points * out.weights.lambda;
  out.value = norm_of(measure, out.point);
  return out;
}

}  // namespace

MinNormResult min_norm_point(const Mat& points, NormKind measure) {
  if (points.cols() == 0) throw ValidationError("min-norm point of an empty set");
  if (measure == NormKind::Euclid) return wolfe(points);
  return min_norm_lp(points, measure);
}

double min_norm_kkt_residual(const Mat& points, const Vec& lambda) {
  const Vec x = points * lambda;
  const Vec grad = 2.0 * points.transpose() * x;
  const double level = 2.0 * x.squaredNorm();  // = lambda' grad
  double res = 0.0;
  for (Eigen::Index t = 0; t < lambda.size(); ++t) {
    if (lambda[t] > 0.0) res = std::max(res, std::abs(grad[t] - level));
    res = std::max(res, level - grad[t]);
  }
  return res;
}

MinNormResult min_norm_sliced_hull(const CharacteristicSet& generators, const Vec& anchor,
                                   NormSpec norm, double slice_tol) {
  if (generators.empty()) throw ValidationError("min-norm slice of an empty generator list");
  const std::size_t m = generators.size();
  std::vector<double> g(m);
  std::vector<std::size_t> zero, pos, neg;
  for (std::size_t t = 0; t < m; ++t) {
    g[t] = generators.generators[t].u.dot(anchor) - generators.generators[t].alpha;
    if (std::abs(g[t]) <= slice_tol) {
      zero.push_back(t);
    } else if (g[t] > 0) {
      pos.push_back(t);
    } else {
      neg.push_back(t);
    }
  }

  // Vertices of {lambda in simplex : g' lambda = 0}.
  struct SlicePoint {
    std::size_t first, second;
    double w_first, w_second;
  };
  std::vector<SlicePoint> slice;
  for (auto t : zero) slice.push_back({t, t, 1.0, 0.0});
  for (auto p : pos) {
    for (auto q : neg) {
      const double denom = g[p] - g[q];
      slice.push_back({std::min(p, q), std::max(p, q), p < q ? -g[q] / denom : g[p] / denom,
                       p < q ? g[p] / denom : -g[q] / denom});
    }
  }
  MinNormResult out;
  if (slice.empty()) {
    out.status = SolveStatus::NoIntersection;
    out.weights.lambda = Vec::Zero(static_cast<Eigen::Index>(m));
    return out;
  }
  std::stable_sort(slice.begin(), slice.end(), [](const SlicePoint& a, const SlicePoint& b) {
    return std::tie(a.first, a.second) < std::tie(b.first, b.second);
  });

  const auto n = generators.generators.front().u.size();
  Mat points(n, static_cast<Eigen::Index>(slice.size()));
  for (std::size_t s = 0; s < slice.size(); ++s) {
    const auto& sp = slice[s];
    Vec col = sp.w_first * generators.generators[sp.first].u;
    if (sp.second != sp.first) col += sp.w_second * generators.generators[sp.second].u;
    points.col(static_cast<Eigen::Index>(s)) = col;
  }

  MinNormResult inner = min_norm_point(points, norm.dual_kind());
  out.status = inner.status;
  out.iterations = inner.iterations;
  out.value = inner.value;
  out.point = inner.point;
  out.weights.lambda = Vec::Zero(static_cast<Eigen::Index>(m));
  if (inner.weights.lambda.size() == 0) return out;
  for (std::size_t s = 0; s < slice.size(); ++s) {
    const double w = inner.weights.lambda[static_cast<Eigen::Index>(s)];
    if (w == 0.0) continue;
    out.weights.lambda[static_cast<Eigen::Index>(slice[s].first)] += w * slice[s].w_first;
    if (slice[s].second != slice[s].first) {
      out.weights.lambda[static_cast<Eigen::Index>(slice[s].second)] += w * slice[s].w_second;
    }
  }
  return out;
}

namespace {

// argmax over gamma in [0, gmax] of k*gamma - rho*|u + gamma*w|.
double ratio_line_search(const Vec& u, const Vec& w, double k, double rho, double gmax) {
  const double ww = w.squaredNorm();
  auto h = [&](double gamma) { return k * gamma - rho * (u + gamma * w).norm(); };
  double best = 0.0;
  double best_val = h(0.0);
  auto consider = [&](double gamma) {
    if (!(gamma > 0.0)) return;
    gamma = std::min(gamma, gmax);
    const double v = h(gamma);
    if (v > best_val) {
      best_val = v;
      best = gamma;
    }
  };
  if (std::isfinite(gmax)) consider(gmax);
  if (ww == 0.0 || rho == 0.0) {
    if (k > 0.0 && std::isfinite(gmax)) consider(gmax);
    return best;
  }
  const double kappa = k / rho;
  if (kappa * kappa < ww) {
    const double uu = u.squaredNorm();
    const double uw = u.dot(w);
    const double cross = std::max(0.0, ww * uu - uw * uw);
    const double gamma = (-uw + kappa * std::sqrt(cross / (ww - kappa * kappa))) / ww;
    consider(gamma);
  } else if (kappa > 0.0 && !std::isfinite(gmax)) {
    // Objective increases without bound along w; cannot happen on the simplex.
    consider(1.0);
  }
  return best;
}

struct InnerResult {
  double value;
  int iterations;
};

// max_lambda c'lambda - rho |A lambda|_2 over the simplex, warm started.
InnerResult frank_wolfe_inner(const Mat& a, const Vec& c, double rho, Vec& lam) {
  const Eigen::Index m = c.size();
  Vec u = a * lam;
  double cl = c.dot(lam);
  const double scale = c.cwiseAbs().maxCoeff() + rho * a.colwise().norm().maxCoeff() + 1e-300;
  int it = 0;
  constexpr int kMaxInner = 200000;
  for (; it < kMaxInner; ++it) {
    const double nu = u.norm();
    Vec grad = c;
    if (nu > 0.0) grad.noalias() -= (rho / nu) * (a.transpose() * u);
    const double glam = grad.dot(lam);

    Eigen::Index s = 0;
    for (Eigen::Index t = 1; t < m; ++t) {
      if (grad[t] > grad[s]) s = t;
    }
    Eigen::Index v = -1;
    for (Eigen::Index t = 0; t < m; ++t) {
      if (lam[t] > 0.0 && (v < 0 || grad[t] < grad[v])) v = t;
    }
    const double fw_gap = grad[s] - glam;
    const double away_gap = glam - grad[v];
    if (fw_gap <= 1e-15 * scale) break;

    if (fw_gap >= away_gap || lam[v] >= 1.0) {
      const Vec w = a.col(s) - u;
      const double k = c[s] - cl;
      const double gamma = ratio_line_search(u, w, k, rho, 1.0);
      if (gamma <= 0.0) break;
      lam *= (1.0 - gamma);
      lam[s] += gamma;
      u += gamma * w;
      cl += gamma * k;
    } else {
      const double gmax = lam[v] / (1.0 - lam[v]);
      const Vec w = u - a.col(v);
      const double k = cl - c[v];
      const double gamma = ratio_line_search(u, w, k, rho, gmax);
      if (gamma <= 0.0) break;
      lam *= (1.0 + gamma);
      lam[v] -= gamma;
      if (gamma >= gmax) lam[v] = 0.0;
      u += gamma * w;
      cl += gamma * k;
    }
    if (it % 64 == 63) {
      lam = lam.cwiseMax(0.0);
      lam /= lam.sum();
      u = a * lam;
      cl = c.dot(lam);
    }
  }
  lam = lam.cwiseMax(0.0);
  lam /= lam.sum();
  return {c.dot(lam) - rho * (a * lam).norm(), it};
}

// Same inner problem for polyhedral dual norms, as an LP.
InnerResult lp_inner(const Mat& a, const Vec& c, double rho, NormKind measure, Vec& lam) {
  const auto n = static_cast<int>(a.rows());
  const auto m = static_cast<int>(a.cols());
  const int extra = measure == NormKind::L1 ? n : 1;
  LpProblem lp;
  lp.objective = Vec::Zero(m + extra);
  lp.objective.head(m) = -c;
  lp.objective.tail(extra).setConstant(rho);
  lp.nonnegative.assign(static_cast<std::size_t>(m + extra), true);
  for (int i = 0; i < n; ++i) {
    const int e = measure == NormKind::L1 ? m + i : m;
    Vec up = Vec::Zero(m + extra);
    up.head(m) = a.row(i).transpose();
    up[e] = -1.0;
    lp.add(up, Relation::LessEq, 0.0);
    Vec down = Vec::Zero(m + extra);
    down.head(m) = -a.row(i).transpose();
    down[e] = -1.0;
    lp.add(down, Relation::LessEq, 0.0);
  }
  Vec sum = Vec::Zero(m + extra);
  sum.head(m).setOnes();
  lp.add(sum, Relation::Equal, 1.0);
  const LpResult res = lp_solve(lp);
  if (res.status != SolveStatus::Optimal) throw NonConvergent("ratio inner LP failed");
  lam = res.x.head(m).cwiseMax(0.0);
  lam /= lam.sum();
  return {c.dot(lam) - rho * norm_of(measure, a * lam), res.iterations};
}

}  // namespace

RatioResult max_ratio_over_hull_detailed(const CharacteristicSet& generators, const Vec& x,
                                         NormSpec norm) {
  RatioResult out;
  const auto m = static_cast<Eigen::Index>(generators.size());
  out.weights.lambda = Vec::Zero(m);
  if (m == 0) return out;
  const Eigen::Index n = x.size();
  Mat a(n, m);
  Vec alpha(m);
  for (Eigen::Index t = 0; t < m; ++t) {
    const auto& gen = generators.generators[static_cast<std::size_t>(t)];
    if (gen.u.size() != n) throw ValidationError("generator and point dimensions disagree");
    a.col(t) = gen.u;
    alpha[t] = gen.alpha;
  }
  const Vec c = a.transpose() * x - alpha;
  const NormKind measure = norm.dual_kind();

  Eigen::Index best_c = 0;
  c.maxCoeff(&best_c);
  if (c[best_c] <= 0.0) {
    out.weights.lambda[best_c] = 1.0;
    return out;
  }

  // A combination with u = 0 and alpha < 0 makes the ratio unbounded.
  {
    LpProblem lp;
    lp.objective = alpha;
    lp.nonnegative.assign(static_cast<std::size_t>(m), true);
    for (Eigen::Index i = 0; i < n; ++i) lp.add(a.row(i).transpose(), Relation::Equal, 0.0);
    lp.add(Vec::Ones(m), Relation::Equal, 1.0);
    const LpResult res = lp_solve(lp);
    if (res.status == SolveStatus::Optimal && res.objective < -kFeasibilityTol) {
      out.value = std::numeric_limits<double>::infinity();
      out.weights.lambda = res.x;
      return out;
    }
  }

  Eigen::Index start = -1;
  double rho = 0.0;
  for (Eigen::Index t = 0; t < m; ++t) {
    const double un = norm_of(measure, a.col(t));
    if (un <= 0.0 || c[t] <= 0.0) continue;
    const double r = c[t] / un;
    if (start < 0 || r > rho) {
      rho = r;
      start = t;
    }
  }
  if (start < 0) {
    out.weights.lambda[best_c] = 1.0;
    return out;
  }
  Vec lam = Vec::Zero(m);
  lam[start] = 1.0;

  constexpr int kMaxOuter = 200;
  for (int k = 0; k < kMaxOuter; ++k) {
    const InnerResult inner = measure == NormKind::Euclid ? frank_wolfe_inner(a, c, rho, lam)
                                                          : lp_inner(a, c, rho, measure, lam);
    out.inner_iterations += inner.iterations;
    out.rho.push_back(rho);
    out.inner_max.push_back(inner.value);
    const double num = c.dot(lam);
    const double den = norm_of(measure, a * lam);
    if (!(den > 0.0)) break;
    const double next = num / den;
    if (out.weights.lambda.isZero() || next > rho) out.weights.lambda = lam;
    if (!(next > rho * (1.0 + 1e-12))) {
      rho = std::max(rho, next);
      break;
    }
    rho = next;
  }
  if (out.weights.lambda.isZero()) out.weights.lambda[start] = 1.0;
  out.value = rho;
  return out;
}

double max_ratio_over_hull(const CharacteristicSet& generators, const Vec& x, NormSpec norm) {
  return max_ratio_over_hull_detailed(generators, x, norm).value;
}

}  // namespace lipstab
