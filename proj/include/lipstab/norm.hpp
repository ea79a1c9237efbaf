#pragma once

#include <optional>
#include <string_view>

#include <Eigen/Dense>

namespace lipstab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Norm on the decision space R^n. The norm on coefficient vectors (the dual
/// space) is derived from it and never stored.
enum class NormKind { Euclid, L1, LInf };

constexpr NormKind dual(NormKind kind) {
  switch (kind) {
    case NormKind::L1:
      return NormKind::LInf;
    case NormKind::LInf:
      return NormKind::L1;
    case NormKind::Euclid:
      break;
  }
  return NormKind::Euclid;
}

double norm_of(NormKind kind, const Eigen::Ref<const Vec>& v);

std::string_view to_string(NormKind kind);
std::optional<NormKind> parse_norm_kind(std::string_view text);

struct NormSpec {
  NormKind kind = NormKind::Euclid;

  NormKind dual_kind() const { return dual(kind); }
  double operator()(const Eigen::Ref<const Vec>& x) const { return norm_of(kind, x); }
  double dual_norm(const Eigen::Ref<const Vec>& u) const { return norm_of(dual(kind), u); }

  friend bool operator==(NormSpec, NormSpec) = default;
};

}  // namespace lipstab
