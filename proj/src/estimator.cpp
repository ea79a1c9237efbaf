#include "lipstab/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <thread>

#include "json.hpp"

#include "lipstab/errors.hpp"
#include "lipstab/projection.hpp"
#include "lipstab/random.hpp"
#include "lipstab/stability.hpp"

namespace lipstab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kOrderingSlack = 0.05;

struct Context {
  const LinearSystem& system;
  std::vector<std::size_t> row_block;
  Polyhedron poly;
  const Vec& anchor;
  std::size_t blocks;
  const SamplingConfig& cfg;
};

QuotientSample draw(const Context& ctx, std::size_t ri, std::size_t i) {
  const double r = ctx.cfg.radii[ri];
  const int n = ctx.system.dimension();
  const auto k = static_cast<Eigen::Index>(ctx.blocks);
  Rng rng(stream_seed(ctx.cfg.seed, ri, i));

  QuotientSample s;
  s.radius_index = ri;
  s.sample_index = i;
  const std::size_t family = ctx.cfg.mode == SamplingMode::Joint ? i % 4 : (i % 2 == 0 ? 1 : 3);
  const bool move_x = family == 0 || family == 2;
  s.x = move_x ? Vec(ctx.anchor + r * rng.ball(n, ctx.system.norm().kind)) : ctx.anchor;
  switch (family) {
    case 0:
    case 1:
      s.p.resize(k);
      for (Eigen::Index j = 0; j < k; ++j) s.p[j] = rng.uniform(-r, r);
      break;
    case 2:
      s.p = Vec::Constant(k, rng.uniform(-r, r));
      break;
    default:
      s.p = Vec::Constant(k, -r * (1.0 - rng.uniform()));
      break;
  }

  s.denominator = residual_inverse_distance(ctx.system, ctx.row_block, s.p, s.x);
  if (s.denominator <= 0.0) return s;  // x in F_J(p): 0/0 := 0
  Polyhedron poly = ctx.poly;
  for (Eigen::Index t = 0; t < poly.b.size(); ++t) poly.b[t] += s.p[static_cast<Eigen::Index>(ctx.row_block[static_cast<std::size_t>(t)])];
  const Projection proj = project_polyhedron(s.x, poly, ctx.system.norm().kind);
  if (proj.status == SolveStatus::Infeasible) {
    s.numerator = kInf;
  } else if (proj.status != SolveStatus::Optimal) {
    throw NonConvergent("projection ended with status " + std::string(to_string(proj.status)));
  } else {
    s.numerator = proj.distance;
  }
  s.quotient = s.numerator / s.denominator;
  return s;
}

nlohmann::json sample_json(const QuotientSample& s) {
  auto vec = [](const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return {{"radius_index", s.radius_index}, {"sample_index", s.sample_index},
          {"p", vec(s.p)},                 {"x", vec(s.x)},
          {"numerator", s.numerator},      {"denominator", s.denominator},
          {"quotient", s.quotient}};
}

}  // namespace

void check(const SamplingConfig& cfg) {
  if (cfg.radii.empty()) throw ValidationError("radius ladder is empty");
  for (std::size_t i = 0; i < cfg.radii.size(); ++i) {
    if (!(cfg.radii[i] > 0.0) || !std::isfinite(cfg.radii[i])) {
      throw ValidationError("radii must be positive and finite");
    }
    if (i > 0 && !(cfg.radii[i] < cfg.radii[i - 1])) {
      throw ValidationError("radii must be strictly decreasing");
    }
  }
  if (cfg.samples_per_radius < 1) throw ValidationError("samples per radius must be at least 1");
}

unsigned worker_count(const SamplingConfig& cfg) {
  if (cfg.threads > 0) return cfg.threads;
  if (const char* env = std::getenv("LIPSTAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

EstimateReport empirical_lip(const LinearSystem& system, const BlockPartition& partition,
                             const Vec& anchor, const SamplingConfig& cfg) {
  check(cfg);
  validate(system, partition).raise_if_failed();
  if (anchor.size() != system.dimension()) throw ValidationError("anchor dimension mismatch");
  if (!system.contains(anchor)) throw InfeasibleAnchor("anchor violates the nominal system");

  EstimateReport out;
  if (!system.truncation_note().empty()) out.notes.emplace_back(kTruncationNote);
  if (cfg.mode == SamplingMode::ParameterOnly) out.notes.emplace_back("sampling: x fixed at the anchor");
  for (double r : cfg.radii) out.radii.push_back({r, 0.0, 0, 0, std::nullopt});
  if (system.empty()) return out;
  if (!check_ssc(system).holds) {
    out.ssc_holds = false;
    out.estimate = kInf;
    for (auto& rs : out.radii) rs.max_quotient = kInf;
    return out;
  }

  const Context ctx{system, partition.row_blocks(system), Polyhedron::from(system), anchor,
                    partition.size(), cfg};
  const std::size_t m = cfg.samples_per_radius;
  const unsigned workers = std::min<std::size_t>(worker_count(cfg), m);

  for (std::size_t ri = 0; ri < cfg.radii.size(); ++ri) {
    std::vector<QuotientSample> results(m);
    std::vector<std::exception_ptr> errors(workers);
    auto work = [&](unsigned w) {
      try {
        for (std::size_t i = w; i < m; i += workers) results[i] = draw(ctx, ri, i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    };
    if (workers <= 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
      for (auto& t : pool) t.join();
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }

    RadiusSummary& summary = out.radii[ri];
    summary.samples = m;
    for (auto& s : results) {
      if (s.denominator <= 0.0) {
        ++summary.zero_over_zero;
        continue;
      }
      if (!summary.best || s.quotient > summary.best->quotient) {
        summary.max_quotient = s.quotient;
        summary.best = std::move(s);
      }
    }
  }
  out.estimate = out.radii.back().max_quotient;
  return out;
}

BlockPartition random_partition(const LinearSystem& system, std::size_t blocks, std::uint64_t seed) {
  const std::size_t m = system.size();
  if (blocks < 1 || blocks > m) throw ValidationError("block count must be between 1 and the row count");
  Rng rng(stream_seed(seed, 0x70617274ULL));
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  for (std::size_t i = m; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::vector<std::size_t> owner(m);
  for (std::size_t i = 0; i < m; ++i) owner[order[i]] = i < blocks ? i : rng.below(blocks);
  std::vector<Block> out(blocks);
  for (std::size_t j = 0; j < blocks; ++j) out[j].label = "B" + std::to_string(j + 1);
  for (std::size_t t = 0; t < m; ++t) out[owner[t]].members.push_back(system.row(t).label);
  return BlockPartition(std::move(out));
}

PartitionComparison partition_compare(const LinearSystem& system,
                                      const std::vector<BlockPartition>& partitions,
                                      const Vec& anchor, const SamplingConfig& cfg) {
  PartitionComparison out;
  out.estimates.push_back({"min", BlockPartition::minimum(system), {}});
  for (std::size_t i = 0; i < partitions.size(); ++i) {
    validate(system, partitions[i]).raise_if_failed();
    out.estimates.push_back({"J" + std::to_string(i + 1), partitions[i], {}});
  }
  out.estimates.push_back({"max", BlockPartition::maximum(system), {}});
  out.lip = lip_bound(system, anchor).bound;
  if (!system.truncation_note().empty()) out.notes.emplace_back(kTruncationNote);

  for (auto& e : out.estimates) e.report = empirical_lip(system, e.partition, anchor, cfg);

  if (std::isinf(out.lip)) {
    for (const auto& e : out.estimates) {
      if (!std::isinf(e.report.estimate)) out.converged = false;
    }
    return out;
  }
  const double slack = kOrderingSlack * out.lip;
  const double lo = out.estimates.front().report.estimate;
  const double hi = out.estimates.back().report.estimate;
  nlohmann::json offending = nlohmann::json::array();
  auto record = [&](const PartitionEstimate& e) {
    nlohmann::json entry{{"partition", e.label}, {"estimate", e.report.estimate}};
    if (e.report.radii.back().best) entry["sample"] = sample_json(*e.report.radii.back().best);
    offending.push_back(std::move(entry));
  };
  for (std::size_t i = 0; i < out.estimates.size(); ++i) {
    const auto& e = out.estimates[i];
    const double v = e.report.estimate;
    if (v + slack < lo || v > hi + slack) {
      out.ordered = false;
      record(e);
    }
    if (std::abs(v - out.lip) > slack) out.converged = false;
  }
  if (!out.ordered) {
    record(out.estimates.front());
    record(out.estimates.back());
    throw OrderingViolation("partition estimates break min <= J <= max beyond 5% of lip",
                            offending.dump());
  }
  return out;
}

}  // namespace lipstab
