#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lipstab/model.hpp"

namespace lipstab {

enum class SamplingMode {
  /// (p, x) both move around (0, anchor).
  Joint,
  /// x stays at the anchor; only p moves.
  ParameterOnly,
};

struct SamplingConfig {
  /// Strictly decreasing, positive.
  std::vector<double> radii{1e-1, 1e-2, 1e-3};
  std::size_t samples_per_radius = 2000;
  std::uint64_t seed = 0;
  SamplingMode mode = SamplingMode::Joint;
  /// 0 means LIPSTAB_THREADS or the hardware concurrency.
  unsigned threads = 0;
};

/// Throws ValidationError on an empty or non-decreasing ladder or a zero
/// sample count.
void check(const SamplingConfig& cfg);

struct QuotientSample {
  std::size_t radius_index = 0;
  std::size_t sample_index = 0;
  Vec p;
  Vec x;
  double numerator = 0.0;
  double denominator = 0.0;
  double quotient = 0.0;
};

struct RadiusSummary {
  double radius = 0.0;
  double max_quotient = 0.0;
  std::size_t samples = 0;
  /// Samples with x in F_J(p): both distances vanish and the quotient is 0.
  std::size_t zero_over_zero = 0;
  /// The sample attaining max_quotient (absent when every sample was 0/0).
  std::optional<QuotientSample> best;
};

struct EstimateReport {
  std::vector<RadiusSummary> radii;
  /// Max quotient at the smallest radius; +inf when SSC fails.
  double estimate = 0.0;
  bool ssc_holds = true;
  std::vector<std::string> notes;
};

/// Sampled limsup of dist(x; F_J(p)) / dist(p; F_J^{-1}(x)) at (0, anchor).
/// Numerators come from the projection oracle.
///
/// Sample i at a radius is drawn from its own stream (seed, radius, i), so
/// the result does not depend on the thread count. Joint mode cycles
/// through four families: x in the ball and p in the cube; x = anchor and p
/// in the cube; x in the ball and p constant; x = anchor and p a negative
/// constant. ParameterOnly keeps x = anchor and alternates the two p
/// families.
EstimateReport empirical_lip(const LinearSystem& system, const BlockPartition& partition,
                             const Vec& anchor, const SamplingConfig& cfg);

struct PartitionEstimate {
  std::string label;
  BlockPartition partition;
  EstimateReport report;
};

struct PartitionComparison {
  /// Minimum first, then the given partitions, then the maximum.
  std::vector<PartitionEstimate> estimates;
  double lip = 0.0;
  bool ordered = true;
  /// Every estimate within 5% of lip.
  bool converged = true;
  std::vector<std::string> notes;
};

/// Estimates per partition against lip_bound. Throws OrderingViolation when
/// min <= J <= max fails by more than 5% of lip.
PartitionComparison partition_compare(const LinearSystem& system,
                                      const std::vector<BlockPartition>& partitions,
                                      const Vec& anchor, const SamplingConfig& cfg);

/// `blocks` nonempty blocks ("B1", "B2", ...) with rows assigned at random.
BlockPartition random_partition(const LinearSystem& system, std::size_t blocks, std::uint64_t seed);

/// Worker count: cfg.threads, else LIPSTAB_THREADS, else the hardware.
unsigned worker_count(const SamplingConfig& cfg);

}  // namespace lipstab
