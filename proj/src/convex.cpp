#include "lipstab/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lipstab/errors.hpp"
#include "lipstab/lp.hpp"
#include "lipstab/projection.hpp"
#include "lipstab/random.hpp"

namespace lipstab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDedupTol = 1e-12;
constexpr std::size_t kInitialSamples = 8;
constexpr double kRefineTol = 1e-4;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

// A subgradient of the norm at v: a dual-unit vector g with <g, v> = |v|.
Vec norm_subgradient(NormKind kind, const Vec& v) {
  Vec g = Vec::Zero(v.size());
  switch (kind) {
    case NormKind::Euclid: {
      const double len = v.norm();
      if (len > 0.0) g = v / len;
      break;
    }
    case NormKind::L1:
      for (Eigen::Index i = 0; i < v.size(); ++i) g[i] = v[i] > 0.0 ? 1.0 : (v[i] < 0.0 ? -1.0 : 0.0);
      break;
    case NormKind::LInf: {
      if (v.size() == 0) break;
      Eigen::Index best = 0;
      for (Eigen::Index i = 1; i < v.size(); ++i) {
        if (std::abs(v[i]) > std::abs(v[best])) best = i;
      }
      if (v[best] != 0.0) g[best] = v[best] > 0.0 ? 1.0 : -1.0;
      break;
    }
  }
  return g;
}

double eval_value(const ConvexFunction& fn, const Vec& x) { return eval_sub(fn, x).value; }

std::string cut_label(const std::string& block, std::size_t k) {
  return "(j=" + block + ", sample " + std::to_string(k) + ")";
}

// Cut bookkeeping shared by the linearisers: per-function sample lists with
// deduplication on u.
class CutSet {
 public:
  explicit CutSet(const ConvexSystem& system) : system_(system), samples_(system.functions.size()) {}

  // Returns true when the cut at x was new.
  bool add(std::size_t j, const Vec& x) {
    ++visited_;
    const auto& fn = system_.functions[j];
    const Subgradient s = eval_sub(fn, x);
    for (const auto& prev : samples_[j]) {
      if ((prev.u - s.u).lpNorm<Eigen::Infinity>() <= kDedupTol) return false;
    }
    // Fenchel-Young at the sample: f*(u) = <u, x> - f(x).
    samples_[j].push_back({j, s.u, s.u.dot(x) - s.value, x});
    return true;
  }

  std::size_t visited() const { return visited_; }

  LinearizedSystem build() const {
    LinearizedSystem out;
    std::vector<Row> rows;
    std::vector<Block> blocks;
    for (std::size_t j = 0; j < samples_.size(); ++j) {
      Block block{system_.functions[j].block, {}};
      for (std::size_t k = 0; k < samples_[j].size(); ++k) {
        const auto& s = samples_[j][k];
        const std::string label = cut_label(block.label, k);
        rows.push_back({label, s.u, s.value});
        block.members.push_back(label);
        out.samples.push_back(s);
      }
      blocks.push_back(std::move(block));
    }
    out.system = LinearSystem(system_.dimension, std::move(rows), system_.norm, system_.truncation_note);
    out.partition = BlockPartition(std::move(blocks));
    return out;
  }

 private:
  const ConvexSystem& system_;
  std::vector<std::vector<ConjugateSample>> samples_;
  std::size_t visited_ = 0;
};

void require_valid(const ConvexSystem& system) { validate(system).raise_if_failed(); }

}  // namespace

int ConvexFunction::dimension() const {
  return std::visit(Overloaded{
                        [](const Affine& f) { return static_cast<int>(f.c.size()); },
                        [](const Quadratic& f) { return static_cast<int>(f.c.size()); },
                        [](const MaxAffine& f) {
                          return f.pieces.empty() ? 0 : static_cast<int>(f.pieces.front().c.size());
                        },
                        [](const ScaledNorm& f) { return static_cast<int>(f.shift.size()); },
                    },
                    f);
}

std::string_view ConvexFunction::class_name() const {
  return std::visit(Overloaded{
                        [](const Affine&) { return std::string_view("affine"); },
                        [](const Quadratic&) { return std::string_view("quadratic"); },
                        [](const MaxAffine&) { return std::string_view("max-affine"); },
                        [](const ScaledNorm&) { return std::string_view("scaled-norm"); },
                    },
                    f);
}

ConvexFunction make_affine(std::string block, Vec c, double d) {
  return {std::move(block), Affine{std::move(c), d}};
}

ConvexFunction make_quadratic(std::string block, Mat q, Vec c, double r) {
  return {std::move(block), Quadratic{std::move(q), std::move(c), r}};
}

ConvexFunction make_max_affine(std::string block, std::vector<Affine> pieces) {
  return {std::move(block), MaxAffine{std::move(pieces)}};
}

ConvexFunction make_scaled_norm(std::string block, double kappa, Vec shift, double r, NormKind norm) {
  return {std::move(block), ScaledNorm{kappa, std::move(shift), r, norm}};
}

ValidationReport validate(const ConvexSystem& system) {
  ValidationReport report;
  if (system.dimension <= 0) report.issues.push_back("dimension must be positive");
  if (system.functions.empty()) report.issues.push_back("convex system has no functions");
  std::vector<std::string> seen;
  for (const auto& fn : system.functions) {
    const std::string name = "function '" + fn.block + "'";
    if (std::find(seen.begin(), seen.end(), fn.block) != seen.end()) {
      report.issues.push_back("duplicate index label '" + fn.block + "'");
    }
    seen.push_back(fn.block);
    if (fn.dimension() != system.dimension) {
      report.issues.push_back(name + " has dimension " + std::to_string(fn.dimension()) + ", expected " +
                              std::to_string(system.dimension));
      continue;
    }
    auto finite = [](const auto& m) { return m.allFinite(); };
    const bool all_finite = std::visit(
        Overloaded{
            [&](const Affine& f) { return finite(f.c) && std::isfinite(f.d); },
            [&](const Quadratic& f) { return finite(f.q) && finite(f.c) && std::isfinite(f.r); },
            [&](const MaxAffine& f) {
              return std::all_of(f.pieces.begin(), f.pieces.end(),
                                 [&](const Affine& p) { return finite(p.c) && std::isfinite(p.d); });
            },
            [&](const ScaledNorm& f) { return std::isfinite(f.kappa) && finite(f.shift) && std::isfinite(f.r); },
        },
        fn.f);
    if (!all_finite) {
      report.issues.push_back(name + " has non-finite coefficients");
      continue;
    }
    std::visit(Overloaded{
                   [&](const Affine&) {},
                   [&](const Quadratic& f) {
                     if (f.q.rows() != system.dimension || f.q.cols() != system.dimension) {
                       report.issues.push_back(name + ": Q must be square of the system dimension");
                       return;
                     }
                     if (!f.q.isApprox(f.q.transpose(), 1e-12)) {
                       report.issues.push_back(name + ": Q is not symmetric");
                       return;
                     }
                     if (Eigen::LLT<Mat>(f.q).info() != Eigen::Success) {
                       report.issues.push_back(name + ": Q is not positive definite");
                     }
                   },
                   [&](const MaxAffine& f) {
                     if (f.pieces.empty()) report.issues.push_back(name + ": no pieces");
                     for (const auto& p : f.pieces) {
                       if (p.c.size() != system.dimension) {
                         report.issues.push_back(name + ": piece dimension mismatch");
                         break;
                       }
                     }
                   },
                   [&](const ScaledNorm& f) {
                     if (!(f.kappa > 0.0)) report.issues.push_back(name + ": kappa must be positive");
                   },
               },
               fn.f);
  }
  return report;
}

Subgradient eval_sub(const ConvexFunction& fn, const Vec& x) {
  return std::visit(Overloaded{
                        [&](const Affine& f) { return Subgradient{f.c.dot(x) + f.d, f.c}; },
                        [&](const Quadratic& f) {
                          const Vec qx = f.q * x;
                          return Subgradient{0.5 * qx.dot(x) + f.c.dot(x) + f.r, qx + f.c};
                        },
                        [&](const MaxAffine& f) {
                          std::size_t best = 0;
                          double value = -kInf;
                          for (std::size_t i = 0; i < f.pieces.size(); ++i) {
                            const double v = f.pieces[i].c.dot(x) + f.pieces[i].d;
                            if (v > value) {
                              value = v;
                              best = i;
                            }
                          }
                          return Subgradient{value, f.pieces[best].c};
                        },
                        [&](const ScaledNorm& f) {
                          const Vec v = x - f.shift;
                          return Subgradient{f.kappa * norm_of(f.norm, v) + f.r,
                                             f.kappa * norm_subgradient(f.norm, v)};
                        },
                    },
                    fn.f);
}

double conjugate_value(const ConvexFunction& fn, const Vec& u) {
  return std::visit(
      Overloaded{
          [&](const Affine& f) {
            const double scale = 1.0 + f.c.lpNorm<Eigen::Infinity>();
            return (u - f.c).lpNorm<Eigen::Infinity>() <= kDedupTol * scale ? -f.d : kInf;
          },
          [&](const Quadratic& f) {
            const Vec w = u - f.c;
            return 0.5 * w.dot(Eigen::LLT<Mat>(f.q).solve(w)) - f.r;
          },
          [&](const MaxAffine& f) {
            // min -sum theta_i d_i  s.t.  sum theta_i c_i = u, theta in the simplex.
            const auto k = static_cast<Eigen::Index>(f.pieces.size());
            const auto n = u.size();
            LpProblem lp;
            lp.objective.resize(k);
            for (Eigen::Index i = 0; i < k; ++i) lp.objective[i] = -f.pieces[static_cast<std::size_t>(i)].d;
            lp.nonnegative.assign(static_cast<std::size_t>(k), true);
            for (Eigen::Index r = 0; r < n; ++r) {
              Vec row(k);
              for (Eigen::Index i = 0; i < k; ++i) row[i] = f.pieces[static_cast<std::size_t>(i)].c[r];
              lp.add(std::move(row), Relation::Equal, u[r]);
            }
            lp.add(Vec::Ones(k), Relation::Equal, 1.0);
            const LpResult res = lp_solve(lp);
            if (res.status == SolveStatus::Infeasible) return kInf;
            if (res.status != SolveStatus::Optimal) {
              throw InternalError("max-affine conjugate LP ended with status " +
                                  std::string(to_string(res.status)));
            }
            return res.objective;
          },
          [&](const ScaledNorm& f) {
            return norm_of(dual(f.norm), u) <= f.kappa * (1.0 + kDedupTol) ? u.dot(f.shift) - f.r : kInf;
          },
      },
      fn.f);
}

LinearizedSystem linearize_at(const ConvexSystem& system, const std::vector<std::vector<Vec>>& points) {
  require_valid(system);
  if (points.size() != system.functions.size()) {
    throw ValidationError("need one point list per function");
  }
  CutSet cuts(system);
  for (std::size_t j = 0; j < points.size(); ++j) {
    for (const auto& x : points[j]) {
      if (x.size() != system.dimension) throw ValidationError("sample point dimension mismatch");
      cuts.add(j, x);
    }
  }
  return cuts.build();
}

namespace {

// Random sample stream of function j: the i-th point depends only on
// (seed, j, i), so budgets nest.
Vec random_sample(const ConvexSystem& system, const LinearizeConfig& cfg, const Vec& anchor,
                  std::size_t j, std::size_t i) {
  Rng rng(stream_seed(cfg.seed, j, i));
  const double r = cfg.radii[i % cfg.radii.size()];
  return anchor + r * rng.ball(system.dimension, system.norm.kind);
}

void check_config(const LinearizeConfig& cfg) {
  if (cfg.budget < 1) throw ValidationError("sample budget must be at least 1");
  if (cfg.radii.empty()) throw ValidationError("sample radius ladder is empty");
  for (double r : cfg.radii) {
    if (!(r > 0.0) || !std::isfinite(r)) throw ValidationError("sample radii must be positive");
  }
}

}  // namespace

LinearizedSystem linearize(const ConvexSystem& system, const LinearizeConfig& cfg, const Vec& anchor) {
  require_valid(system);
  check_config(cfg);
  if (anchor.size() != system.dimension) throw ValidationError("anchor dimension mismatch");
  CutSet cuts(system);
  for (std::size_t j = 0; j < system.functions.size(); ++j) {
    cuts.add(j, anchor);
    for (std::size_t i = 1; i < cfg.budget; ++i) cuts.add(j, random_sample(system, cfg, anchor, j, i));
  }
  return cuts.build();
}

ConvexLipReport lip_bound_convex(const ConvexSystem& system, const Vec& anchor,
                                 const LinearizeConfig& cfg, double tol) {
  require_valid(system);
  check_config(cfg);
  if (anchor.size() != system.dimension) throw ValidationError("anchor dimension mismatch");
  for (const auto& fn : system.functions) {
    const double v = eval_value(fn, anchor);
    if (v > tol) {
      std::ostringstream msg;
      msg << "anchor violates function '" << fn.block << "' by " << v;
      throw InfeasibleAnchor(msg.str());
    }
  }

  const std::size_t k = system.functions.size();
  CutSet cuts(system);
  std::vector<std::size_t> used(k, 0);  // sample points spent per function
  std::vector<std::size_t> next_random(k, 1);
  auto spend = [&](std::size_t j, const Vec& x) {
    if (used[j] >= cfg.budget) return;
    ++used[j];
    cuts.add(j, x);
  };
  auto spend_random = [&](std::size_t j, std::size_t count) {
    for (std::size_t c = 0; c < count && used[j] < cfg.budget; ++c) {
      spend(j, random_sample(system, cfg, anchor, j, next_random[j]++));
    }
  };
  for (std::size_t j = 0; j < k; ++j) {
    spend(j, anchor);
    spend_random(j, kInitialSamples - 1);
  }

  ConvexLipReport out;
  LinearizedSystem lin;
  std::size_t step = 0;
  while (true) {
    lin = cuts.build();
    out.report = lip_bound(lin.system, anchor, tol);
    out.history.push_back(out.report.bound);
    const std::size_t h = out.history.size();
    if (std::isinf(out.report.bound)) {
      // (0, 0) already lies in the sampled hull, hence in the full one.
      out.converged = true;
      break;
    }
    auto small = [&](std::size_t i) {
      const double a = out.history[i];
      const double b = out.history[i - 1];
      return std::abs(a - b) <= kRefineTol * std::max(std::abs(a), std::numeric_limits<double>::min());
    };
    if (h >= 3 && small(h - 1) && small(h - 2)) {
      out.converged = true;
      break;
    }
    if (std::all_of(used.begin(), used.end(), [&](std::size_t u) { return u >= cfg.budget; })) break;

    // Targeted samples: step from the anchor against the slice minimizer,
    // which reaches neighbouring pieces of nonsmooth functions; plus one
    // fresh random sample per function.
    const double radius = cfg.radii[step % cfg.radii.size()] * std::pow(0.1, static_cast<double>(step / cfg.radii.size()));
    for (std::size_t j = 0; j < k; ++j) {
      if (out.report.minimizer && out.report.minimizer->norm() > 0.0) {
        const Vec dir = *out.report.minimizer / out.report.minimizer->norm();
        spend(j, anchor - radius * dir);
        spend(j, anchor + radius * dir);
      }
      spend_random(j, 1);
    }
    ++step;
  }

  const std::size_t h = out.history.size();
  out.gap = h >= 2 ? std::abs(out.history[h - 1] - out.history[h - 2]) : 0.0;
  if (std::isnan(out.gap)) out.gap = 0.0;
  out.cuts = lin.system.size();
  out.min_generator_norm = kInf;
  out.max_generator_norm = 0.0;
  for (const auto& s : lin.samples) {
    const double len = system.norm.dual_norm(s.u);
    out.min_generator_norm = std::min(out.min_generator_norm, len);
    out.max_generator_norm = std::max(out.max_generator_norm, len);
  }
  std::ostringstream note;
  note.precision(17);
  note << "sampled cuts: " << out.cuts << ", generator norms in [" << out.min_generator_norm << ", "
       << out.max_generator_norm << "], refinement steps toward the slice minimizer";
  out.report.notes.push_back(note.str());
  if (!out.converged) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "refinement stopped at the sample budget; last gap " << out.gap;
    out.report.notes.push_back(msg.str());
  }
  return out;
}

ConvexDistance distance_convex(const ConvexSystem& system, const Vec& p, const Vec& x,
                               const KelleyConfig& cfg) {
  require_valid(system);
  const std::size_t k = system.functions.size();
  if (p.size() != static_cast<Eigen::Index>(k)) throw ValidationError("perturbation needs one entry per function");
  if (x.size() != system.dimension) throw ValidationError("point dimension mismatch");

  std::vector<Vec> normals;
  std::vector<double> rhs;
  auto add_cut = [&](std::size_t j, const Vec& y) {
    const Subgradient s = eval_sub(system.functions[j], y);
    normals.push_back(s.u);
    rhs.push_back(s.u.dot(y) - s.value + p[static_cast<Eigen::Index>(j)]);
  };

  ConvexDistance out;
  Vec y = x;
  while (true) {
    bool violated = false;
    for (std::size_t j = 0; j < k; ++j) {
      if (eval_value(system.functions[j], y) - p[static_cast<Eigen::Index>(j)] > cfg.violation_tol) {
        add_cut(j, y);
        violated = true;
      }
    }
    if (!violated) break;
    if (normals.size() > cfg.max_cuts) {
      throw NonConvergent("cutting planes reached " + std::to_string(cfg.max_cuts) + " cuts");
    }
    Polyhedron poly{Mat(static_cast<Eigen::Index>(normals.size()), system.dimension),
                    Vec(static_cast<Eigen::Index>(normals.size()))};
    for (std::size_t i = 0; i < normals.size(); ++i) {
      poly.a.row(static_cast<Eigen::Index>(i)) = normals[i].transpose();
      poly.b[static_cast<Eigen::Index>(i)] = rhs[i];
    }
    const Projection proj = project_polyhedron(x, poly, system.norm.kind);
    ++out.iterations;
    if (proj.status == SolveStatus::Infeasible) throw InfeasibleSystem("cutting-plane relaxation is empty");
    if (proj.status != SolveStatus::Optimal) {
      throw NonConvergent("projection ended with status " + std::string(to_string(proj.status)));
    }
    y = proj.point;
  }
  out.point = y;
  out.distance = system.norm(y - x);
  out.cuts = normals.size();
  return out;
}

}  // namespace lipstab
