#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "lipstab/norm.hpp"

namespace lipstab {

/// %.17g, with "inf", "-inf" and "nan" for the non-finite values.
std::string format_double(double v);
/// Entries joined by ';' in the same number format.
std::string format_vector(const Vec& v);

/// Comma-separated output with a header. Fields holding a comma, quote or
/// newline are quoted.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);

  void row(const std::vector<std::string>& fields);

 private:
  void write(const std::vector<std::string>& fields);

  std::ostream& out_;
  std::size_t columns_;
};

}  // namespace lipstab
