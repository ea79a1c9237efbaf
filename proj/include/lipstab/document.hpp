#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lipstab/convex.hpp"
#include "lipstab/model.hpp"

namespace lipstab {

inline constexpr std::string_view kDocumentVersion = "lipstab-v1";

/// In-memory form of a system file. Exactly one of `rows` and `convex` is
/// non-empty.
struct SystemDocument {
  int dimension = 0;
  NormKind norm = NormKind::Euclid;
  std::vector<Row> rows;
  std::optional<std::vector<Block>> partition;
  std::optional<std::vector<ConvexFunction>> convex;
  /// Marks the system as a finite truncation of an infinite family.
  std::optional<std::string> truncation;

  bool is_convex() const { return convex.has_value(); }
};

bool operator==(const SystemDocument& a, const SystemDocument& b);

/// Strict parse: unknown or missing fields raise SchemaError naming the
/// field path (e.g. "rows[2].a").
SystemDocument parse_document(std::string_view text);
SystemDocument load_document(const std::string& path);

/// Single-line JSON; doubles are written in shortest round-trip form.
std::string serialize(const SystemDocument& doc);

/// Linear documents only. The partition defaults to the maximum one.
LinearSystem to_linear_system(const SystemDocument& doc);
BlockPartition to_partition(const SystemDocument& doc, const LinearSystem& system);
/// Convex documents only; one block per function.
ConvexSystem to_convex_system(const SystemDocument& doc);

SystemDocument to_document(const LinearSystem& system, std::optional<BlockPartition> partition = {});
SystemDocument to_document(const ConvexSystem& system);

/// Parsed and validated model objects.
struct ParsedSystem {
  std::optional<LinearSystem> linear;
  std::optional<ConvexSystem> convex;
  BlockPartition partition;
};

ParsedSystem to_model(const SystemDocument& doc);
ParsedSystem parse_system(const std::string& path);

}  // namespace lipstab
