#include "lipstab/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "lipstab/errors.hpp"

namespace lipstab {

LinearSystem::LinearSystem(int dimension, std::vector<Row> rows, NormSpec norm,
                           std::string truncation_note)
    : dimension_(dimension),
      rows_(std::move(rows)),
      norm_(norm),
      truncation_note_(std::move(truncation_note)) {}

double LinearSystem::max_residual(const Vec& x) const {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < rows_.size(); ++t) worst = std::max(worst, residual(t, x));
  return worst;
}

bool LinearSystem::contains(const Vec& x, double tol) const {
  return rows_.empty() || max_residual(x) <= tol;
}

Mat LinearSystem::coefficients() const {
  Mat a(dimension_, static_cast<Eigen::Index>(rows_.size()));
  for (std::size_t t = 0; t < rows_.size(); ++t) a.col(static_cast<Eigen::Index>(t)) = rows_[t].a;
  return a;
}

Vec LinearSystem::rhs() const {
  Vec b(static_cast<Eigen::Index>(rows_.size()));
  for (std::size_t t = 0; t < rows_.size(); ++t) b[static_cast<Eigen::Index>(t)] = rows_[t].b;
  return b;
}

LinearSystem LinearSystem::with_rows(std::vector<Row> rows) const {
  return LinearSystem(dimension_, std::move(rows), norm_, truncation_note_);
}

BlockPartition BlockPartition::minimum(const LinearSystem& system) {
  Block all{"all", {}};
  all.members.reserve(system.size());
  for (const auto& row : system.rows()) all.members.push_back(row.label);
  return BlockPartition({std::move(all)});
}

BlockPartition BlockPartition::maximum(const LinearSystem& system) {
  std::vector<Block> blocks;
  blocks.reserve(system.size());
  for (const auto& row : system.rows()) blocks.push_back({row.label, {row.label}});
  return BlockPartition(std::move(blocks));
}

namespace {

void check_partition(const LinearSystem& system, const BlockPartition& partition,
                     std::vector<std::string>& issues, std::vector<std::size_t>* row_block) {
  std::unordered_map<std::string, std::size_t> owner;
  std::unordered_set<std::string> block_labels;
  for (std::size_t j = 0; j < partition.size(); ++j) {
    const Block& block = partition.blocks()[j];
    if (!block_labels.insert(block.label).second) {
      issues.push_back("duplicate block label '" + block.label + "'");
    }
    if (block.members.empty()) issues.push_back("block '" + block.label + "' is empty");
    for (const auto& member : block.members) {
      if (!owner.emplace(member, j).second) {
        issues.push_back("label '" + member + "' appears in more than one block");
      }
    }
  }
  std::unordered_set<std::string> labels;
  for (const auto& row : system.rows()) labels.insert(row.label);
  for (const auto& block : partition.blocks()) {
    for (const auto& member : block.members) {
      if (!labels.contains(member)) {
        issues.push_back("block '" + block.label + "' names unknown label '" + member + "'");
      }
    }
  }
  bool covers = true;
  if (row_block) row_block->assign(system.size(), 0);
  for (std::size_t t = 0; t < system.size(); ++t) {
    auto it = owner.find(system.row(t).label);
    if (it == owner.end()) {
      covers = false;
    } else if (row_block) {
      (*row_block)[t] = it->second;
    }
  }
  if (!covers) issues.push_back("partition does not cover index set");
}

}  // namespace

std::vector<std::size_t> BlockPartition::row_blocks(const LinearSystem& system) const {
  std::vector<std::string> issues;
  std::vector<std::size_t> result;
  check_partition(system, *this, issues, &result);
  ValidationReport{std::move(issues)}.raise_if_failed();
  return result;
}

void ValidationReport::raise_if_failed() const {
  if (ok()) return;
  std::ostringstream msg;
  for (std::size_t i = 0; i < issues.size(); ++i) msg << (i ? "; " : "") << issues[i];
  throw ValidationError(msg.str());
}

ValidationReport validate(const LinearSystem& system) {
  ValidationReport report;
  if (system.dimension() <= 0) report.issues.push_back("dimension must be positive");
  std::unordered_set<std::string> labels;
  for (const auto& row : system.rows()) {
    if (!labels.insert(row.label).second) {
      report.issues.push_back("duplicate index label '" + row.label + "'");
    }
    if (row.a.size() != system.dimension()) {
      report.issues.push_back("row '" + row.label + "' has " + std::to_string(row.a.size()) +
                              " entries, expected " + std::to_string(system.dimension()));
    }
    if (!row.a.allFinite() || !std::isfinite(row.b)) {
      report.issues.push_back("row '" + row.label + "' has non-finite entries");
    }
  }
  return report;
}

ValidationReport validate(const LinearSystem& system, const BlockPartition& partition) {
  ValidationReport report = validate(system);
  check_partition(system, partition, report.issues, nullptr);
  return report;
}

ValidationReport validate(const LinearSystem& system, const BlockPartition& partition,
                          const Perturbation& p) {
  ValidationReport report = validate(system, partition);
  if (p.size() != partition.size()) {
    report.issues.push_back("perturbation has " + std::to_string(p.size()) + " values for " +
                            std::to_string(partition.size()) + " blocks");
  } else if (!p.values.allFinite()) {
    report.issues.push_back("perturbation has non-finite values");
  }
  return report;
}

double residual_inverse_distance(const LinearSystem& system, std::span<const std::size_t> row_block,
                                 const Vec& p, const Vec& x) {
  double dist = 0.0;
  for (std::size_t t = 0; t < system.size(); ++t) {
    dist = std::max(dist, system.residual(t, x) - p[static_cast<Eigen::Index>(row_block[t])]);
  }
  return dist;
}

double residual_inverse_distance(const LinearSystem& system, const BlockPartition& partition,
                                 const Perturbation& p, const Vec& x) {
  validate(system, partition, p).raise_if_failed();
  if (x.size() != system.dimension()) throw ValidationError("point has wrong dimension");
  const auto row_block = partition.row_blocks(system);
  return residual_inverse_distance(system, row_block, p.values, x);
}

CharacteristicSet characteristic_generators(const LinearSystem& system,
                                            const BlockPartition& partition,
                                            const Perturbation& p) {
  validate(system, partition, p).raise_if_failed();
  const auto row_block = partition.row_blocks(system);
  CharacteristicSet set;
  set.generators.reserve(system.size());
  for (std::size_t t = 0; t < system.size(); ++t) {
    set.generators.push_back(
        {system.row(t).a, system.row(t).b + p.values[static_cast<Eigen::Index>(row_block[t])]});
  }
  return set;
}

LinearSystem perturbed_system(const LinearSystem& system, const BlockPartition& partition,
                              const Perturbation& p) {
  validate(system, partition, p).raise_if_failed();
  const auto row_block = partition.row_blocks(system);
  std::vector<Row> rows = system.rows();
  for (std::size_t t = 0; t < rows.size(); ++t) {
    rows[t].b += p.values[static_cast<Eigen::Index>(row_block[t])];
  }
  return system.with_rows(std::move(rows));
}

}  // namespace lipstab
