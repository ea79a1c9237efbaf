#include "lipstab/projection.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "lipstab/errors.hpp"

namespace lipstab {

Polyhedron Polyhedron::from(const LinearSystem& system) {
  return {system.coefficients().transpose(), system.rhs()};
}

namespace {

// Goldfarb-Idnani with identity Hessian. Constraints are kept in the form
// n_i' y >= c_i with n_i = -a_i, c_i = -b_i.
class DualActiveSet {
 public:
  DualActiveSet(const Vec& x, const Polyhedron& poly) : x_(x), poly_(poly) {
    row_norm_.resize(poly.size());
    for (Eigen::Index i = 0; i < poly.size(); ++i) row_norm_[i] = poly.a.row(i).norm();
  }

  Projection solve() {
    Projection out;
    const int n = poly_.dimension();
    Vec y = x_;
    const double scale = 1.0 + x_.lpNorm<Eigen::Infinity>();
    const int max_iter = 50 * static_cast<int>(poly_.size() + n) + 100;

    for (Eigen::Index i = 0; i < poly_.size(); ++i) {
      if (row_norm_[i] == 0.0 && poly_.b[i] < -kFeasibilityTol) {
        out.status = SolveStatus::Infeasible;
        return out;
      }
    }

    int iter = 0;
    while (true) {
      // Most violated constraint, measured as a distance.
      Eigen::Index p = -1;
      double worst = 0.0;
      for (Eigen::Index i = 0; i < poly_.size(); ++i) {
        if (row_norm_[i] == 0.0 || is_active(i)) continue;
        const double viol = (poly_.a.row(i).dot(y) - poly_.b[i]) / row_norm_[i];
        if (viol > 1e-13 * scale && viol > worst) {
          worst = viol;
          p = i;
        }
      }
      if (p < 0) break;

      double u_p = 0.0;
      while (true) {
        if (++iter > max_iter) {
          out.status = SolveStatus::IterLimit;
          out.iterations = iter;
          return out;
        }
        const Vec np = -poly_.a.row(p).transpose();
        const int k = static_cast<int>(active_.size());
        Vec z;
        Vec r;
        directions(np, n, k, z, r);

        double t1 = std::numeric_limits<double>::infinity();
        int drop = -1;
        for (int j = 0; j < k; ++j) {
          if (r[j] > 1e-14 && u_[static_cast<std::size_t>(j)] / r[j] < t1) {
            t1 = u_[static_cast<std::size_t>(j)] / r[j];
            drop = j;
          }
        }
        double t2 = std::numeric_limits<double>::infinity();
        const double zn = z.dot(np);
        if (z.norm() > 1e-12 * row_norm_[p]) {
          const double slack = np.dot(y) + poly_.b[p];  // n_p'y - c_p
          t2 = std::max(0.0, -slack) / zn;
        }
        const double t = std::min(t1, t2);
        if (!std::isfinite(t)) {
          out.status = SolveStatus::Infeasible;
          out.iterations = iter;
          return out;
        }
        for (int j = 0; j < k; ++j) u_[static_cast<std::size_t>(j)] -= t * r[j];
        u_p += t;
        if (std::isfinite(t2)) y += t * z;
        if (t == t2) {
          active_.push_back(p);
          u_.push_back(u_p);
          break;
        }
        active_.erase(active_.begin() + drop);
        u_.erase(u_.begin() + drop);
        // The dropped constraint may have made the target satisfied.
        if (poly_.a.row(p).dot(y) - poly_.b[p] <= 1e-13 * scale * row_norm_[p]) break;
      }
    }

    out.status = SolveStatus::Optimal;
    out.point = y;
    out.distance = (y - x_).norm();
    out.multipliers = Vec::Zero(poly_.size());
    for (std::size_t j = 0; j < active_.size(); ++j) out.multipliers[active_[j]] = std::max(0.0, u_[j]);
    out.iterations = iter;
    return out;
  }

 private:
  bool is_active(Eigen::Index i) const {
    for (auto j : active_) {
      if (j == i) return true;
    }
    return false;
  }

  // z = J2 J2' n_p (step in primal space), r = R^{-1} J1' n_p (dual step),
  // where [J1 J2] R is the QR factorisation of the active normals.
  void directions(const Vec& np, int n, int k, Vec& z, Vec& r) const {
    if (k == 0) {
      z = np;
      r.resize(0);
      return;
    }
    Mat normals(n, k);
    for (int j = 0; j < k; ++j) normals.col(j) = -poly_.a.row(active_[static_cast<std::size_t>(j)]).transpose();
    Eigen::HouseholderQR<Mat> qr(normals);
    const Mat q = qr.householderQ();
    const Mat rr = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    const Vec qn = q.transpose() * np;
    z = q.rightCols(n - k) * qn.tail(n - k);
    r = rr.triangularView<Eigen::Upper>().solve(qn.head(k));
  }

  const Vec& x_;
  const Polyhedron& poly_;
  Vec row_norm_;
  std::vector<Eigen::Index> active_;
  std::vector<double> u_;
};

Projection project_lp(const Vec& x, const Polyhedron& poly, NormKind norm) {
  const int n = poly.dimension();
  // Variables: y (n, free), then e (n, >= 0) for L1 or s (1, >= 0) for LInf.
  const int extra = norm == NormKind::L1 ? n : 1;
  LpProblem lp;
  lp.objective = Vec::Zero(n + extra);
  lp.objective.tail(extra).setOnes();
  lp.nonnegative.assign(static_cast<std::size_t>(n + extra), false);
  for (int i = n; i < n + extra; ++i) lp.nonnegative[static_cast<std::size_t>(i)] = true;
  for (int i = 0; i < n; ++i) {
    const int e = norm == NormKind::L1 ? n + i : n;
    Vec up = Vec::Zero(n + extra);
    up[i] = 1.0;
    up[e] = -1.0;
    lp.add(up, Relation::LessEq, x[i]);
    Vec down = Vec::Zero(n + extra);
    down[i] = -1.0;
    down[e] = -1.0;
    lp.add(down, Relation::LessEq, -x[i]);
  }
  for (Eigen::Index r = 0; r < poly.size(); ++r) {
    Vec row = Vec::Zero(n + extra);
    row.head(n) = poly.a.row(r).transpose();
    lp.add(row, Relation::LessEq, poly.b[r]);
  }
  const LpResult res = lp_solve(lp);
  Projection out;
  out.status = res.status;
  out.iterations = res.iterations;
  if (res.status != SolveStatus::Optimal) return out;
  out.point = res.x.head(n);
  out.distance = norm_of(norm, out.point - x);
  return out;
}

}  // namespace

Projection project_polyhedron(const Vec& x, const Polyhedron& poly, NormKind norm) {
  if (poly.a.cols() != x.size() || poly.b.size() != poly.a.rows()) {
    throw ValidationError("polyhedron and point dimensions disagree");
  }
  if (norm != NormKind::Euclid) return project_lp(x, poly, norm);
  return DualActiveSet(x, poly).solve();
}

Projection project_polyhedron(const Vec& x, const LinearSystem& system) {
  return project_polyhedron(x, Polyhedron::from(system), system.norm().kind);
}

}  // namespace lipstab
