#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "lipstab/demo.hpp"
#include "lipstab/document.hpp"
#include "lipstab/errors.hpp"
#include "lipstab/random.hpp"
#include "lipstab/stability.hpp"

using namespace lipstab;

namespace {

std::string schema_path(const std::string& text) {
  try {
    parse_document(text);
  } catch (const SchemaError& e) {
    return e.path();
  }
  return "<accepted>";
}

const char* kHalfspace = R"({"version": "lipstab-v1", "dimension": 2, "norm": "euclid",
  "rows": [{"label": "t", "a": [1, 0], "b": 1}]})";

}  // namespace

TEST_CASE("every demo round-trips") {
  std::vector<SystemDocument> docs{demo_paper_example(2), demo_paper_example(7), demo_convex_square(),
                                   demo_convex_square_shifted(), demo_random(3, 10, 7), demo_random(5, 30, 1)};
  for (const auto& doc : docs) {
    const std::string text = serialize(doc);
    const SystemDocument back = parse_document(text);
    CHECK(back == doc);
    CHECK(serialize(back) == text);
  }
}

TEST_CASE("doubles survive the round trip bit for bit") {
  Rng rng(81);
  std::vector<Row> rows;
  for (int t = 0; t < 50; ++t) {
    Vec a = rng.normal_vector(3) * std::pow(10.0, rng.uniform(-300, 300));
    rows.push_back({"r" + std::to_string(t), a, rng.uniform(-1, 1) / 3.0});
  }
  rows.push_back({"tiny", Vec::Constant(3, 4.9406564584124654e-324), -0.0});
  const SystemDocument doc = to_document(LinearSystem(3, rows));
  CHECK(parse_document(serialize(doc)) == doc);
}

TEST_CASE("demo contents") {
  const SystemDocument p = demo_paper_example(3);
  REQUIRE(p.rows.size() == 4);
  const double expected[][3] = {{-1, 0, 1}, {2, 0, 1}, {-3, 0, 1}, {1, 1, 0}};
  for (std::size_t t = 0; t < 4; ++t) {
    CHECK(p.rows[t].a[0] == expected[t][0]);
    CHECK(p.rows[t].a[1] == expected[t][1]);
    CHECK(p.rows[t].b == expected[t][2]);
  }
  CHECK(p.rows[3].label == "t=0");
  CHECK(p.truncation.has_value());
  CHECK_THROWS_AS(demo_paper_example(1), ValidationError);

  const ConvexSystem sq = to_convex_system(demo_convex_square());
  REQUIRE(sq.functions.size() == 1);
  CHECK(std::string(sq.functions[0].class_name()) == "quadratic");
  CHECK(eval_sub(sq.functions[0], Vec::Constant(1, 3)).value == 9);

  const SystemDocument r = demo_random(3, 10, 7);
  CHECK(check_ssc(to_linear_system(r)).holds);
  CHECK(serialize(demo_random(3, 10, 7)) == serialize(r));
}

TEST_CASE("minimal halfspace document") {
  const ParsedSystem ps = to_model(parse_document(kHalfspace));
  REQUIRE(ps.linear);
  CHECK(ps.linear->size() == 1);
  CHECK(ps.partition.size() == 1);
}

TEST_CASE("strict schema errors name the field") {
  CHECK(schema_path(kHalfspace) == "<accepted>");
  CHECK(schema_path(R"({"version": "lipstab-v2", "dimension": 1, "norm": "euclid", "rows": []})") == "version");
  CHECK(schema_path(R"({"dimension": 1, "norm": "euclid", "rows": []})") == "version");
  CHECK(schema_path(R"({"version": "lipstab-v1", "dimension": 1, "norm": "l2", "rows": []})") == "norm");
  CHECK(schema_path(R"({"version": "lipstab-v1", "dimension": 0, "norm": "euclid", "rows": []})") == "dimension");
  CHECK(schema_path(R"({"version": "lipstab-v1", "dimension": 1, "norm": "euclid", "rows": [], "extra": 1})") ==
        "extra");
  CHECK(schema_path(R"({"version": "lipstab-v1", "dimension": 1, "norm": "euclid",
    "rows": [{"label": "a", "a": [1], "b": 0}, {"label": "b", "a": [1], "b": 0}, {"label": "c", "a": ["x"], "b": 0}]})") ==
        "rows[2].a[0]");
  CHECK(schema_path(R"({"version": "lipstab-v1", "dimension": 1, "norm": "euclid",
    "rows": [{"label": "a", "a": [1], "b": 0, "c": 2}]})") == "rows[0].c");
  CHECK(schema_path(R"({"version": "lipstab-v1", "dimension": 1, "norm": "euclid",
    "rows": [{"label": "a", "a": [1]}]})") == "rows[0].b");
  CHECK(schema_path(R"({"version": "lipstab-v1", "dimension": 1, "norm": "euclid",
    "convex": [{"block": "f", "class": "cubic"}]})") == "convex[0].class");
  CHECK(schema_path(R"({"version": "lipstab-v1", "dimension": 2, "norm": "euclid",
    "convex": [{"block": "f", "class": "quadratic", "Q": [[2, 0], [0]], "c": [0, 0], "r": 0}]})") == "convex[0].Q[1]");
  CHECK(schema_path(R"({"version": "lipstab-v1", "dimension": 1, "norm": "euclid",
    "rows": [{"label": "a", "a": [1], "b": 0}],
    "convex": [{"block": "f", "class": "affine", "c": [1], "d": 0}]})") == "convex");
  CHECK(schema_path(R"({"version": "lipstab-v1", "dimension": 1, "norm": "euclid",
    "rows": [{"label": "a", "a": [1], "b": 0}], "partition": [{"block": "J", "labels": [3]}]})") ==
        "partition[0].labels[0]");
  CHECK(schema_path("{not json")  == "");
}

TEST_CASE("validation errors from the model") {
  const std::string overlap = R"({"version": "lipstab-v1", "dimension": 1, "norm": "euclid",
    "rows": [{"label": "a", "a": [1], "b": 0}, {"label": "b", "a": [-1], "b": 1}],
    "partition": [{"block": "J1", "labels": ["a", "b"]}, {"block": "J2", "labels": ["b"]}]})";
  CHECK_THROWS_AS(to_model(parse_document(overlap)), ValidationError);

  const std::string wrong_dim = R"({"version": "lipstab-v1", "dimension": 2, "norm": "euclid",
    "rows": [{"label": "a", "a": [1], "b": 0}]})";
  CHECK_THROWS_AS(to_model(parse_document(wrong_dim)), ValidationError);

  const std::string indefinite = R"({"version": "lipstab-v1", "dimension": 1, "norm": "euclid",
    "convex": [{"block": "f", "class": "quadratic", "Q": [[-2]], "c": [0], "r": 0}]})";
  CHECK_THROWS_AS(to_model(parse_document(indefinite)), ValidationError);
}

TEST_CASE("convex quadratic document") {
  const std::string text = R"({"version": "lipstab-v1", "dimension": 1, "norm": "euclid",
    "convex": [{"block": "f", "class": "quadratic", "Q": [[2]], "c": [0], "r": -1}]})";
  const ParsedSystem ps = to_model(parse_document(text));
  REQUIRE(ps.convex);
  CHECK(eval_sub(ps.convex->functions[0], Vec::Constant(1, 1)).value == 0);
  CHECK(ps.partition.size() == 1);
  CHECK(ps.partition.blocks()[0].label == "f");
}

TEST_CASE("every convex class round-trips") {
  ConvexSystem sys;
  sys.dimension = 2;
  sys.norm = NormSpec{NormKind::L1};
  sys.functions = {make_affine("a", Vec::Constant(2, 0.1), -0.3),
                   make_quadratic("q", Mat::Identity(2, 2) * 3, Vec::Constant(2, 1.0 / 3), -1),
                   make_max_affine("m", {{Vec::Constant(2, 1), 0}, {Vec::Constant(2, -1), 0.5}}),
                   make_scaled_norm("n", 2.5, Vec::Constant(2, 0.7), -2, NormKind::L1)};
  const SystemDocument doc = to_document(sys);
  const SystemDocument back = parse_document(serialize(doc));
  CHECK(back == doc);
  const ConvexSystem again = to_convex_system(back);
  CHECK(again.functions.size() == 4);
  CHECK(std::string(again.functions[3].class_name()) == "scaled-norm");
}

TEST_CASE("load from disk") {
  const std::string path = "test_document_tmp.json";
  {
    std::ofstream out(path);
    out << kHalfspace;
  }
  const ParsedSystem ps = parse_system(path);
  CHECK(ps.linear->row(0).label == "t");
  std::remove(path.c_str());
  CHECK_THROWS_AS(parse_system("does/not/exist.json"), ValidationError);
}
