#include "lipstab/norm.hpp"

namespace lipstab {

double norm_of(NormKind kind, const Eigen::Ref<const Vec>& v) {
  if (v.size() == 0) return 0.0;
  switch (kind) {
    case NormKind::L1:
      return v.lpNorm<1>();
    case NormKind::LInf:
      return v.lpNorm<Eigen::Infinity>();
    case NormKind::Euclid:
      break;
  }
  return v.norm();
}

std::string_view to_string(NormKind kind) {
  switch (kind) {
    case NormKind::L1:
      return "l1";
    case NormKind::LInf:
      return "linf";
    case NormKind::Euclid:
      break;
  }
  return "euclid";
}

std::optional<NormKind> parse_norm_kind(std::string_view text) {
  if (text == "euclid") return NormKind::Euclid;
  if (text == "l1") return NormKind::L1;
  if (text == "linf") return NormKind::LInf;
  return std::nullopt;
}

}  // namespace lipstab
