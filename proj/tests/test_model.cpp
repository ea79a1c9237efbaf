#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "lipstab/errors.hpp"
#include "lipstab/estimator.hpp"
#include "lipstab/model.hpp"
#include "lipstab/random.hpp"

using namespace lipstab;

namespace {

Vec v(std::initializer_list<double> xs) {
  Vec out(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) out[i++] = x;
  return out;
}

LinearSystem two_rows() { return LinearSystem(2, {{"t1", v({1, 0}), 0}, {"t2", v({-1, 0}), 0}}); }

bool mentions(const ValidationReport& r, const std::string& text) {
  return std::any_of(r.issues.begin(), r.issues.end(),
                     [&](const std::string& s) { return s.find(text) != std::string::npos; });
}

LinearSystem random_system(Rng& rng, int n, int m) {
  std::vector<Row> rows;
  for (int t = 0; t < m; ++t) rows.push_back({"r" + std::to_string(t), rng.normal_vector(n), rng.uniform(-1, 1)});
  return LinearSystem(n, std::move(rows));
}

}  // namespace

TEST_CASE("norms and their duals") {
  for (NormKind k : {NormKind::Euclid, NormKind::L1, NormKind::LInf}) {
    CHECK(dual(dual(k)) == k);
    CHECK(norm_of(k, Vec::Zero(3)) == 0.0);
    CHECK(parse_norm_kind(to_string(k)) == k);
  }
  CHECK(dual(NormKind::L1) == NormKind::LInf);
  CHECK(!parse_norm_kind("l2").has_value());
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const Vec x = rng.normal_vector(4);
    const double lam = rng.uniform(-3, 3);
    for (NormKind k : {NormKind::Euclid, NormKind::L1, NormKind::LInf}) {
      CHECK(norm_of(k, lam * x) == doctest::Approx(std::abs(lam) * norm_of(k, x)));
      // Hoelder: <u, x> <= |u|_* |x|
      const Vec u = rng.normal_vector(4);
      CHECK(u.dot(x) <= norm_of(dual(k), u) * norm_of(k, x) + 1e-12);
    }
  }
}

TEST_CASE("validation") {
  const LinearSystem sys = two_rows();
  CHECK(validate(sys, BlockPartition({{"a", {"t1"}}, {"b", {"t2"}}})).ok());
  CHECK(mentions(validate(sys, BlockPartition(std::vector<Block>{{"a", {"t1"}}})), "partition does not cover index set"));
  CHECK(mentions(validate(sys, BlockPartition({{"a", {"t1", "t2"}}, {"b", {"t2"}}})), "more than one block"));
  CHECK(mentions(validate(sys, BlockPartition(std::vector<Block>{{"a", {"t1", "t2", "t9"}}})), "unknown label 't9'"));
  CHECK(mentions(validate(sys, BlockPartition({{"a", {"t1", "t2"}}, {"b", {}}})), "is empty"));

  const LinearSystem wide(2, {{"t1", v({1, 0, 0}), 0}});
  CHECK(mentions(validate(wide), "row 't1' has 3 entries, expected 2"));
  const LinearSystem dup(1, {{"t", v({1}), 0}, {"t", v({2}), 0}});
  CHECK(mentions(validate(dup), "duplicate index label"));
  const LinearSystem bad(1, {{"t", v({NAN}), 0}});
  CHECK(mentions(validate(bad), "non-finite"));
  CHECK_THROWS_AS(BlockPartition(std::vector<Block>{{"a", {"t1"}}}).row_blocks(sys), ValidationError);

  const auto p = BlockPartition::maximum(sys);
  CHECK(mentions(validate(sys, p, Perturbation::zero(1)), "perturbation has 1 values for 2 blocks"));
  // Zero rows are kept.
  const LinearSystem zero_row(1, {{"z", v({0}), 1}});
  CHECK(validate(zero_row).ok());
}

TEST_CASE("minimum and maximum partitions") {
  const LinearSystem sys = two_rows();
  CHECK(BlockPartition::minimum(sys).size() == 1);
  CHECK(BlockPartition::maximum(sys).size() == 2);
  CHECK(BlockPartition::maximum(sys).blocks()[1].members == std::vector<std::string>{"t2"});
}

TEST_CASE("residual inverse distance examples") {
  const LinearSystem half(2, {{"t", v({1, 0}), 1}});
  const auto p1 = BlockPartition::maximum(half);
  CHECK(residual_inverse_distance(half, p1, Perturbation::zero(1), v({2, 0})) == 1.0);
  CHECK(residual_inverse_distance(half, p1, Perturbation::zero(1), v({0, 0})) == 0.0);
  const LinearSystem pair = two_rows();
  CHECK(residual_inverse_distance(pair, BlockPartition::minimum(pair), Perturbation::zero(1), v({0.3, 0})) ==
        doctest::Approx(0.3));
}

TEST_CASE("characteristic generators") {
  const LinearSystem half(2, {{"t", v({1, 2}), 3}});
  const auto g = characteristic_generators(half, BlockPartition::maximum(half), Perturbation{v({0.5})});
  REQUIRE(g.size() == 1);
  CHECK(g.generators[0].u == v({1, 2}));
  CHECK(g.generators[0].alpha == 3.5);

  const LinearSystem sys(1, {{"a", v({1}), 0}, {"b", v({2}), 0}, {"c", v({3}), 0}});
  const BlockPartition two({{"J1", {"a", "c"}}, {"J2", {"b"}}});
  const auto shifted = characteristic_generators(sys, two, Perturbation{v({1, -1})});
  CHECK(shifted.generators[0].alpha == 1);
  CHECK(shifted.generators[1].alpha == -1);
  CHECK(shifted.generators[2].alpha == 1);
}

TEST_CASE("properties on random systems") {
  for (std::uint64_t k = 0; k < 200; ++k) {
    Rng rng(stream_seed(41, k));
    const int n = 1 + static_cast<int>(rng.below(4));
    const int m = 1 + static_cast<int>(rng.below(10));
    const LinearSystem sys = random_system(rng, n, m);
    const std::size_t blocks = 1 + rng.below(static_cast<std::uint64_t>(m));
    const BlockPartition part = random_partition(sys, blocks, k);
    REQUIRE(validate(sys, part).ok());
    const auto row_block = part.row_blocks(sys);

    Perturbation p{Vec(static_cast<Eigen::Index>(blocks))};
    Perturbation q{Vec(static_cast<Eigen::Index>(blocks))};
    for (std::size_t j = 0; j < blocks; ++j) {
      p.values[static_cast<Eigen::Index>(j)] = rng.uniform(-1, 1);
      q.values[static_cast<Eigen::Index>(j)] = rng.uniform(-1, 1);
    }
    const Vec x = rng.normal_vector(n);
    const double dp = residual_inverse_distance(sys, part, p, x);
    const double dq = residual_inverse_distance(sys, part, q, x);
    CHECK(dp >= 0.0);
    CHECK(std::abs(dp - dq) <= (p.values - q.values).lpNorm<Eigen::Infinity>() + 1e-12);
    CHECK((dp == 0.0) == perturbed_system(sys, part, p).contains(x, 0.0));

    // The nearest point of the inverse image, p'_j = max(p_j, residual), attains dp.
    Vec nearest = p.values;
    for (std::size_t t = 0; t < sys.size(); ++t) {
      const auto j = static_cast<Eigen::Index>(row_block[t]);
      nearest[j] = std::max(nearest[j], sys.residual(t, x));
    }
    CHECK((nearest - p.values).lpNorm<Eigen::Infinity>() == doctest::Approx(dp));

    // At p = 0 the generators do not depend on the partition.
    const auto g_part = characteristic_generators(sys, part, Perturbation::zero(blocks));
    const auto g_min = characteristic_generators(sys, BlockPartition::minimum(sys), Perturbation::zero(1));
    const auto g_max = characteristic_generators(sys, BlockPartition::maximum(sys), Perturbation::zero(sys.size()));
    REQUIRE(g_part.size() == sys.size());
    for (std::size_t t = 0; t < sys.size(); ++t) {
      CHECK(g_part.generators[t].u == g_min.generators[t].u);
      CHECK(g_part.generators[t].alpha == g_min.generators[t].alpha);
      CHECK(g_max.generators[t].alpha == g_min.generators[t].alpha);
    }
  }
}
