#include "doctest.h"

#include <cmath>

#include "lipstab/convex.hpp"
#include "lipstab/errors.hpp"
#include "lipstab/projection.hpp"
#include "lipstab/random.hpp"

using namespace lipstab;

namespace {

Vec v(std::initializer_list<double> xs) {
  Vec out(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) out[i++] = x;
  return out;
}

Mat m1(double x) { return Mat::Constant(1, 1, x); }

ConvexSystem single(ConvexFunction f) {
  ConvexSystem s;
  s.dimension = f.dimension();
  s.functions.push_back(std::move(f));
  return s;
}

ConvexFunction abs_x() { return make_max_affine("abs", {{v({1}), 0}, {v({-1}), 0}}); }

double value_at(const ConvexFunction& f, const Vec& x) { return eval_sub(f, x).value; }

// MaxAffine conjugate in 2-D: min -sum theta_i d_i over the simplex with
// sum theta_i c_i = u, enumerating supports of at most three pieces.
double max_affine_conjugate_2d(const MaxAffine& f, const Vec& u) {
  const auto k = f.pieces.size();
  double best = INFINITY;
  auto consider = [&](const std::vector<std::size_t>& idx) {
    const auto s = static_cast<Eigen::Index>(idx.size());
    Mat sys(3, s);
    Vec rhs(3);
    rhs << u[0], u[1], 1;
    for (Eigen::Index i = 0; i < s; ++i) {
      sys.block(0, i, 2, 1) = f.pieces[idx[static_cast<std::size_t>(i)]].c;
      sys(2, i) = 1;
    }
    const Vec theta = sys.completeOrthogonalDecomposition().solve(rhs);
    if ((sys * theta - rhs).norm() > 1e-9 || theta.minCoeff() < -1e-12) return;
    double val = 0;
    for (Eigen::Index i = 0; i < s; ++i) val -= theta[i] * f.pieces[idx[static_cast<std::size_t>(i)]].d;
    best = std::min(best, val);
  };
  for (std::size_t a = 0; a < k; ++a) {
    consider({a});
    for (std::size_t b = a + 1; b < k; ++b) {
      consider({a, b});
      for (std::size_t c = b + 1; c < k; ++c) consider({a, b, c});
    }
  }
  return best;
}

ConvexFunction random_function(Rng& rng, int cls, int n) {
  switch (cls) {
    case 0:
      return make_affine("f", rng.normal_vector(n), rng.normal());
    case 1: {
      Mat b(n, n);
      for (int j = 0; j < n; ++j) b.col(j) = rng.normal_vector(n);
      return make_quadratic("f", b * b.transpose() + 0.5 * Mat::Identity(n, n), rng.normal_vector(n), rng.normal());
    }
    case 2: {
      std::vector<Affine> pieces;
      for (int i = 0; i < 5; ++i) pieces.push_back({rng.normal_vector(n), rng.normal()});
      return make_max_affine("f", std::move(pieces));
    }
    default: {
      static const NormKind kinds[] = {NormKind::Euclid, NormKind::L1, NormKind::LInf};
      return make_scaled_norm("f", rng.uniform(0.5, 2), rng.normal_vector(n), rng.normal(), kinds[rng.below(3)]);
    }
  }
}

}  // namespace

TEST_CASE("subgradient examples") {
  const auto sq = make_quadratic("f", m1(2), v({0}), 0);
  const Subgradient s = eval_sub(sq, v({3}));
  CHECK(s.value == 9);
  CHECK(s.u[0] == 6);

  const Subgradient a = eval_sub(abs_x(), v({0}));
  CHECK(a.value == 0);
  CHECK(a.u[0] == 1);

  const auto aff = make_affine("g", v({2}), 1);
  for (double x : {-3.0, 0.0, 4.5}) {
    const Subgradient g = eval_sub(aff, v({x}));
    CHECK(g.value == 2 * x + 1);
    CHECK(g.u[0] == 2);
  }

  // Norm at its kink: u = 0 is a valid subgradient.
  const auto nrm = make_scaled_norm("h", 2, v({1, 1}), 0);
  CHECK(eval_sub(nrm, v({1, 1})).u.norm() == 0.0);
  CHECK(eval_sub(nrm, v({4, 5})).value == doctest::Approx(10));
}

TEST_CASE("conjugate examples") {
  const auto sq = make_quadratic("f", m1(2), v({0}), 0);
  CHECK(conjugate_value(sq, v({2})) == doctest::Approx(1));
  CHECK(conjugate_value(abs_x(), v({0.5})) == doctest::Approx(0).epsilon(1e-12));
  CHECK(std::isinf(conjugate_value(abs_x(), v({2}))));
  const auto aff = make_affine("g", v({1, -2}), 3);
  CHECK(conjugate_value(aff, v({1, -2})) == -3);
  CHECK(std::isinf(conjugate_value(aff, v({1, -1.5}))));
  const auto nrm = make_scaled_norm("h", 2, v({1, 1}), 0.5, NormKind::LInf);
  // Dual of LInf is L1: |(1.5, 0.5)|_1 = 2 <= kappa.
  CHECK(conjugate_value(nrm, v({1.5, 0.5})) == doctest::Approx(1.5));
  CHECK(std::isinf(conjugate_value(nrm, v({1.5, 0.6}))));
}

TEST_CASE("linearize at explicit samples") {
  const ConvexSystem sys = single(make_quadratic("f", m1(2), v({0}), 0));
  const LinearizedSystem lin = linearize_at(sys, {{v({-1}), v({0}), v({1})}});
  REQUIRE(lin.system.size() == 3);
  const double expected_a[] = {-2, 0, 2};
  const double expected_b[] = {1, 0, 1};
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(lin.system.row(t).a[0] == expected_a[t]);
    CHECK(lin.system.row(t).b == expected_b[t]);
    REQUIRE(lin.samples[t].provenance);
  }
  CHECK(lin.system.row(1).label == "(j=f, sample 1)");
  CHECK(lin.partition.size() == 1);

  // Repeated points collapse to one cut.
  const LinearizedSystem dup = linearize_at(sys, {{v({1}), v({1}), v({1 + 1e-14})}});
  CHECK(dup.system.size() == 1);
}

TEST_CASE("linearize structure") {
  ConvexSystem aff = single(make_affine("g", v({1, 2}), -1));
  for (std::size_t budget : {1u, 8u, 64u}) {
    LinearizeConfig cfg;
    cfg.budget = budget;
    CHECK(linearize(aff, cfg, v({0, 0})).system.size() == 1);
  }

  ConvexSystem two;
  two.dimension = 1;
  two.functions = {make_quadratic("f", m1(2), v({0}), -1), abs_x()};
  const LinearizedSystem lin = linearize(two, {}, v({0.5}));
  REQUIRE(lin.partition.size() == 2);
  CHECK(lin.partition.blocks()[0].label == "f");
  CHECK(lin.partition.blocks()[1].label == "abs");
  CHECK(lin.partition.blocks()[1].members.size() == 2);
  CHECK(validate(lin.system, lin.partition).ok());
}

TEST_CASE("conjugate correctness on random samples") {
  for (int cls = 0; cls < 4; ++cls) {
    for (std::uint64_t k = 0; k < 20; ++k) {
      Rng rng(stream_seed(61, static_cast<std::uint64_t>(cls), k));
      const int n = 1 + static_cast<int>(rng.below(3));
      const ConvexFunction f = random_function(rng, cls, n);
      const Vec xs = rng.normal_vector(n);
      const Subgradient s = eval_sub(f, xs);
      const double fstar = conjugate_value(f, s.u);
      REQUIRE(std::isfinite(fstar));
      // Fenchel-Young equality at the cut and inequality everywhere else.
      CHECK(std::abs(s.value + fstar - s.u.dot(xs)) <= 1e-9 * (1 + std::abs(s.value)));
      for (int i = 0; i < 50; ++i) {
        const Vec y = 3.0 * rng.normal_vector(n);
        CHECK(value_at(f, y) + fstar >= s.u.dot(y) - 1e-9 * (1 + std::abs(fstar)));
      }
    }
  }
}

TEST_CASE("conjugates match analytic maximisers") {
  for (std::uint64_t k = 0; k < 100; ++k) {
    Rng rng(stream_seed(62, k));
    const int n = 1 + static_cast<int>(rng.below(3));

    const ConvexFunction q = random_function(rng, 1, n);
    const auto& qq = std::get<Quadratic>(q.f);
    const Vec u = rng.normal_vector(n);
    const Vec xq = qq.q.llt().solve(u - qq.c);
    CHECK(conjugate_value(q, u) == doctest::Approx(u.dot(xq) - value_at(q, xq)).epsilon(1e-7));

    const ConvexFunction s = random_function(rng, 3, n);
    const auto& ss = std::get<ScaledNorm>(s.f);
    const Vec inside = rng.ball(n, dual(ss.norm)) * ss.kappa;
    CHECK(conjugate_value(s, inside) == doctest::Approx(inside.dot(ss.shift) - value_at(s, ss.shift)).epsilon(1e-7));
    // Outside the dual ball the sup along x = shift + tau w is unbounded.
    const Vec outside = rng.sphere(n, dual(ss.norm)) * ss.kappa * 1.5;
    CHECK(std::isinf(conjugate_value(s, outside)));
  }
}

TEST_CASE("max-affine conjugate matches support enumeration") {
  for (std::uint64_t k = 0; k < 100; ++k) {
    Rng rng(stream_seed(63, k));
    const ConvexFunction f = random_function(rng, 2, 2);
    const auto& ma = std::get<MaxAffine>(f.f);
    const Vec u = 1.5 * rng.normal_vector(2);
    const double oracle = max_affine_conjugate_2d(ma, u);
    const double got = conjugate_value(f, u);
    if (std::isinf(oracle)) {
      CHECK(std::isinf(got));
    } else {
      CHECK(got == doctest::Approx(oracle).epsilon(1e-9));
    }
  }
}

TEST_CASE("cuts are valid and tight at the anchor") {
  for (std::uint64_t k = 0; k < 40; ++k) {
    Rng rng(stream_seed(64, k));
    const int n = 1 + static_cast<int>(rng.below(3));
    ConvexSystem sys;
    sys.dimension = n;
    for (int cls = 0; cls < 4; ++cls) {
      ConvexFunction f = random_function(rng, cls, n);
      f.block = "f" + std::to_string(cls);
      sys.functions.push_back(std::move(f));
    }
    const Vec anchor = rng.normal_vector(n);
    LinearizeConfig cfg;
    cfg.budget = 16;
    cfg.seed = k;
    const LinearizedSystem lin = linearize(sys, cfg, anchor);
    for (std::size_t t = 0; t < lin.system.size(); ++t) {
      const auto& sample = lin.samples[t];
      const auto& fn = sys.functions[sample.block];
      for (int i = 0; i < 20; ++i) {
        const Vec y = 2.0 * rng.normal_vector(n);
        CHECK(sample.u.dot(y) - sample.value <= value_at(fn, y) + 1e-9 * (1 + std::abs(sample.value)));
      }
      REQUIRE(sample.provenance);
      const Vec& xs = *sample.provenance;
      CHECK(std::abs(value_at(fn, xs) + sample.value - sample.u.dot(xs)) <= 1e-9 * (1 + std::abs(sample.value)));
    }
    // The first cut of each function comes from the anchor.
    const auto row_block = lin.partition.row_blocks(lin.system);
    std::vector<bool> seen(sys.functions.size(), false);
    for (std::size_t t = 0; t < lin.system.size(); ++t) {
      if (seen[row_block[t]]) continue;
      seen[row_block[t]] = true;
      CHECK(*lin.samples[t].provenance == anchor);
    }
  }
}

TEST_CASE("convex lip bound examples") {
  const ConvexSystem shifted = single(make_quadratic("f", m1(2), v({0}), -1));
  const ConvexLipReport r = lip_bound_convex(shifted, v({1}));
  CHECK(r.converged);
  CHECK(r.report.bound == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(r.report.bound <= 0.5 + 1e-12);
  for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i] >= r.history[i - 1]);

  const ConvexLipReport sq = lip_bound_convex(single(make_quadratic("f", m1(2), v({0}), 0)), v({0}));
  CHECK(std::isinf(sq.report.bound));
  CHECK(sq.report.regime == Regime::SSCFails);

  const ConvexLipReport aff = lip_bound_convex(single(make_affine("g", v({3, 4}), -5)), v({0.6, 0.8}));
  CHECK(aff.report.bound == doctest::Approx(0.2));
  CHECK(aff.converged);

  CHECK_THROWS_AS(lip_bound_convex(shifted, v({2})), InfeasibleAnchor);
  const ConvexLipReport inner = lip_bound_convex(shifted, v({0}));
  CHECK(inner.report.bound == 0.0);
}

TEST_CASE("convex bound is nondecreasing in the sample budget") {
  ConvexSystem sys;
  sys.dimension = 2;
  sys.functions = {make_quadratic("q", Mat::Identity(2, 2) * 2, v({0, 0}), -1),
                   make_scaled_norm("n", 1, v({1, 0}), -1.2)};
  // Anchor on the quadratic's boundary, inside the norm ball.
  const Vec anchor = v({std::sqrt(0.5), std::sqrt(0.5)});
  double prev = 0;
  for (std::size_t budget : {1u, 2u, 4u, 8u, 16u, 32u}) {
    LinearizeConfig cfg;
    cfg.budget = budget;
    cfg.seed = 5;
    const LinearizedSystem lin = linearize(sys, cfg, anchor);
    const double bound = lip_bound(lin.system, anchor).bound;
    CHECK(bound >= prev - 1e-12);
    prev = bound;
  }
  // Only the quadratic is active; the exact value is 1/|2 anchor| = 1/2.
  CHECK(prev <= 0.5 + 1e-12);
  CHECK(lip_bound_convex(sys, anchor).report.bound == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("convex distance") {
  const ConvexSystem shifted = single(make_quadratic("f", m1(2), v({0}), -1));
  CHECK(distance_convex(shifted, v({0}), v({2})).distance == doctest::Approx(1).epsilon(1e-6));
  CHECK(distance_convex(shifted, v({0}), v({0.3})).distance == 0.0);
  // f <= p gives |x| <= sqrt(1 + p).
  CHECK(distance_convex(shifted, v({3}), v({-5})).distance == doctest::Approx(3).epsilon(1e-6));
  CHECK_THROWS_AS(distance_convex(shifted, v({-2}), v({0})), InfeasibleSystem);

  for (std::uint64_t k = 0; k < 50; ++k) {
    Rng rng(stream_seed(65, k));
    const int n = 1 + static_cast<int>(rng.below(4));
    const Vec c = rng.normal_vector(n);
    const double d = rng.normal();
    const double p = rng.uniform(-0.5, 0.5);
    const Vec x = 2.0 * rng.normal_vector(n);
    const ConvexDistance got = distance_convex(single(make_affine("g", c, d)), v({p}), x);
    Polyhedron half{c.transpose(), Vec::Constant(1, p - d)};
    CHECK(got.distance == doctest::Approx(project_polyhedron(x, half).distance).epsilon(1e-9));
    CHECK(got.iterations <= 2);

    // Ball of radius rho around a centre: |x - s|^2 <= rho^2.
    const Vec s = rng.normal_vector(n);
    const double rho = rng.uniform(0.5, 2);
    const ConvexSystem ball = single(make_quadratic("b", 2 * Mat::Identity(n, n), -2 * s, s.squaredNorm() - rho * rho));
    const double expected = std::max(0.0, (x - s).norm() - rho);
    CHECK(std::abs(distance_convex(ball, v({0}), x).distance - expected) <= 1e-6);
  }
}

TEST_CASE("convex validation") {
  ConvexSystem bad = single(make_quadratic("f", m1(-1), v({0}), 0));
  CHECK(!validate(bad).ok());
  ConvexSystem kappa = single(make_scaled_norm("n", 0, v({0}), 0));
  CHECK(!validate(kappa).ok());
  ConvexSystem dup;
  dup.dimension = 1;
  dup.functions = {abs_x(), abs_x()};
  CHECK(!validate(dup).ok());
  CHECK(validate(single(abs_x())).ok());
  CHECK(!validate(single(make_affine("g", v({NAN}), 0))).ok());
  CHECK(!validate(single(make_scaled_norm("n", INFINITY, v({0}), 0))).ok());
}
