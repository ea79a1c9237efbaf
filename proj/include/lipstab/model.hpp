#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lipstab/norm.hpp"

namespace lipstab {

/// Absolute tolerance for "x satisfies the inequality" checks.
inline constexpr double kFeasibilityTol = 1e-9;

/// One nominal inequality <a, x> <= b.
struct Row {
  std::string label;
  Vec a;
  double b = 0.0;
};

/// Finite linear inequality system {<a_t, x> <= b_t, t in T} on R^n.
///
/// Construction does not validate; call `validate` before analysis. Zero
/// coefficient rows are kept as they are.
class LinearSystem {
 public:
  LinearSystem() = default;
  LinearSystem(int dimension, std::vector<Row> rows, NormSpec norm = {},
               std::string truncation_note = {});

  int dimension() const { return dimension_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  const std::vector<Row>& rows() const { return rows_; }
  const Row& row(std::size_t i) const { return rows_[i]; }
  NormSpec norm() const { return norm_; }

  /// Non-empty when the system is a finite truncation of an infinite family.
  const std::string& truncation_note() const { return truncation_note_; }

  /// <a_t, x> - b_t.
  double residual(std::size_t t, const Vec& x) const { return rows_[t].a.dot(x) - rows_[t].b; }
  double max_residual(const Vec& x) const;
  bool contains(const Vec& x, double tol = kFeasibilityTol) const;

  /// Coefficient vectors as the columns of an n x |T| matrix.
  Mat coefficients() const;
  Vec rhs() const;

  /// Same dimension, norm and note; different rows.
  LinearSystem with_rows(std::vector<Row> rows) const;

 private:
  int dimension_ = 0;
  std::vector<Row> rows_;
  NormSpec norm_;
  std::string truncation_note_;
};

struct Block {
  std::string label;
  std::vector<std::string> members;
};

/// Partition {T_j | j in J} of a system's row labels.
class BlockPartition {
 public:
  BlockPartition() = default;
  explicit BlockPartition(std::vector<Block> blocks) : blocks_(std::move(blocks)) {}

  /// One block holding every row (constant perturbations).
  static BlockPartition minimum(const LinearSystem& system);
  /// One singleton block per row (independent perturbations).
  static BlockPartition maximum(const LinearSystem& system);

  const std::vector<Block>& blocks() const { return blocks_; }
  std::size_t size() const { return blocks_.size(); }

  /// Block index of every row of `system`, in row order. Throws
  /// ValidationError when the partition does not fit the system.
  std::vector<std::size_t> row_blocks(const LinearSystem& system) const;

 private:
  std::vector<Block> blocks_;
};

/// Right-hand-side perturbation p in l_inf(J): one value per block.
struct Perturbation {
  Vec values;

  static Perturbation zero(std::size_t blocks) { return {Vec::Zero(static_cast<Eigen::Index>(blocks))}; }
  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  double norm() const { return values.size() == 0 ? 0.0 : values.lpNorm<Eigen::Infinity>(); }
};

/// A point (u, alpha) of X* x R.
struct Generator {
  Vec u;
  double alpha = 0.0;
};

/// Generators whose convex hull is the characteristic set C_J(p).
struct CharacteristicSet {
  std::vector<Generator> generators;

  std::size_t size() const { return generators.size(); }
  bool empty() const { return generators.empty(); }
};

struct ValidationReport {
  std::vector<std::string> issues;

  bool ok() const { return issues.empty(); }
  /// Throws ValidationError listing every issue.
  void raise_if_failed() const;
};

ValidationReport validate(const LinearSystem& system);
ValidationReport validate(const LinearSystem& system, const BlockPartition& partition);
ValidationReport validate(const LinearSystem& system, const BlockPartition& partition,
                          const Perturbation& p);

/// dist(p; F_J^{-1}(x)) in the sup-norm:
/// max_j [ max_{t in T_j} (<a_t, x> - b_t) - p_j ]_+.
double residual_inverse_distance(const LinearSystem& system, const BlockPartition& partition,
                                 const Perturbation& p, const Vec& x);
/// Same, with the row-to-block map precomputed by BlockPartition::row_blocks.
double residual_inverse_distance(const LinearSystem& system, std::span<const std::size_t> row_block,
                                 const Vec& p, const Vec& x);

/// (a_t, b_t + p_j) for every row t in T_j, in row order.
CharacteristicSet characteristic_generators(const LinearSystem& system,
                                            const BlockPartition& partition,
                                            const Perturbation& p);

/// The perturbed system sigma_J(p) as a plain linear system.
LinearSystem perturbed_system(const LinearSystem& system, const BlockPartition& partition,
                              const Perturbation& p);

}  // namespace lipstab
