#include "doctest.h"

#include <cmath>

#include "lipstab/projection.hpp"
#include "lipstab/random.hpp"

using namespace lipstab;

namespace {

Polyhedron box2() {
  Polyhedron p{Mat(4, 2), Vec::Ones(4)};
  p.a << 1, 0, -1, 0, 0, 1, 0, -1;
  return p;
}

// Euclidean projection by active-set enumeration: for every subset S of
// rows, project onto {a_S y = b_S} and keep the nearest feasible candidate.
double enumerate_projection(const Vec& x, const Polyhedron& poly) {
  const auto m = poly.size();
  double best = INFINITY;
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (mask & (1u << i)) rows.push_back(i);
    }
    Vec y = x;
    if (!rows.empty()) {
      Mat a(static_cast<Eigen::Index>(rows.size()), poly.dimension());
      Vec b(static_cast<Eigen::Index>(rows.size()));
      for (std::size_t k = 0; k < rows.size(); ++k) {
        a.row(static_cast<Eigen::Index>(k)) = poly.a.row(rows[k]);
        b[static_cast<Eigen::Index>(k)] = poly.b[rows[k]];
      }
      // y = x - A'(AA')^+ (Ax - b); skip inconsistent equality sets.
      const Mat pinv = a.completeOrthogonalDecomposition().pseudoInverse();
      y = x - pinv * (a * x - b);
      if ((a * y - b).norm() > 1e-9) continue;
    }
    if (((poly.a * y - poly.b).array() <= 1e-9).all()) best = std::min(best, (y - x).norm());
  }
  return best;
}

// Polyhedral-norm oracle in 2-D: min over a fine grid of feasible points,
// refined around the incumbent.
double grid_projection(const Vec& x, const Polyhedron& poly, NormKind norm) {
  Vec centre = x;
  double span = 8.0;
  double best = INFINITY;
  Vec arg = x;
  for (int level = 0; level < 30; ++level) {
    for (int i = -40; i <= 40; ++i) {
      for (int j = -40; j <= 40; ++j) {
        Vec y(2);
        y << centre[0] + span * i / 40.0, centre[1] + span * j / 40.0;
        if (((poly.a * y - poly.b).array() <= 0).all()) {
          const double d = norm_of(norm, y - x);
          if (d < best) {
            best = d;
            arg = y;
          }
        }
      }
    }
    centre = arg;
    span /= 2.0;
  }
  return best;
}

}  // namespace

TEST_CASE("box corner projection") {
  Vec x(2);
  x << 2, 2;
  const Projection p = project_polyhedron(x, box2());
  REQUIRE(p.status == SolveStatus::Optimal);
  CHECK(p.distance == doctest::Approx(std::sqrt(2.0)));
  CHECK(p.point[0] == doctest::Approx(1));
  CHECK(p.point[1] == doctest::Approx(1));
  // x - point = A' nu.
  CHECK((x - p.point - box2().a.transpose() * p.multipliers).norm() < 1e-12);
}

TEST_CASE("inside point projects to itself") {
  Vec x(2);
  x << 0.5, -0.25;
  const Projection p = project_polyhedron(x, box2());
  REQUIRE(p.status == SolveStatus::Optimal);
  CHECK(p.distance == 0.0);
  CHECK(p.point == x);
}

TEST_CASE("empty polyhedron") {
  Polyhedron p{Mat(2, 1), Vec(2)};
  p.a << 1, -1;
  p.b << -1, -1;  // x <= -1 and x >= 1
  const Projection r = project_polyhedron(Vec::Zero(1), p);
  CHECK(r.status == SolveStatus::Infeasible);

  Polyhedron zero{Mat::Zero(1, 2), Vec::Constant(1, -1.0)};
  CHECK(project_polyhedron(Vec::Zero(2), zero).status == SolveStatus::Infeasible);
}

TEST_CASE("box projection in polyhedral norms") {
  Vec x(2);
  x << 2, 3;
  CHECK(project_polyhedron(x, box2(), NormKind::LInf).distance == doctest::Approx(2));
  CHECK(project_polyhedron(x, box2(), NormKind::L1).distance == doctest::Approx(3));
}

TEST_CASE("random Euclidean projections match active-set enumeration") {
  for (std::uint64_t k = 0; k < 200; ++k) {
    Rng rng(stream_seed(21, k));
    const int n = 2 + static_cast<int>(rng.below(3));
    const int m = 1 + static_cast<int>(rng.below(7));
    Polyhedron poly{Mat(m, n), Vec(m)};
    for (int i = 0; i < m; ++i) {
      poly.a.row(i) = rng.normal_vector(n).transpose();
      poly.b[i] = rng.uniform(-0.5, 1.0);
    }
    const Vec x = 3.0 * rng.normal_vector(n);
    const Projection p = project_polyhedron(x, poly);
    const double oracle = enumerate_projection(x, poly);
    if (std::isinf(oracle)) {
      CHECK(p.status == SolveStatus::Infeasible);
      continue;
    }
    REQUIRE(p.status == SolveStatus::Optimal);
    CHECK(p.distance == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(((poly.a * p.point - poly.b).array() <= 1e-9).all());
    CHECK(p.multipliers.minCoeff() >= 0.0);
  }
}

TEST_CASE("random polyhedral-norm projections match a refined grid") {
  for (NormKind norm : {NormKind::L1, NormKind::LInf}) {
    for (std::uint64_t k = 0; k < 30; ++k) {
      Rng rng(stream_seed(22, k));
      Polyhedron poly{Mat(4, 2), Vec(4)};
      for (int i = 0; i < 4; ++i) {
        poly.a.row(i) = rng.sphere(2, NormKind::Euclid).transpose();
        poly.b[i] = rng.uniform(0.2, 1.0);
      }
      const Vec x = 2.0 * rng.normal_vector(2);
      const Projection p = project_polyhedron(x, poly, norm);
      REQUIRE(p.status == SolveStatus::Optimal);
      const double oracle = grid_projection(x, poly, norm);
      CHECK(p.distance <= oracle + 1e-9);
      CHECK(p.distance == doctest::Approx(oracle).epsilon(1e-5));
    }
  }
}
