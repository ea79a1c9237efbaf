#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lipstab {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitInvalid = 2,
  kExitNonConvergent = 3,
};

/// Runs one command (`args` excludes the program name). The last line on
/// `out` is a machine-readable verdict; diagnostics go to `err`. `in` is
/// read when --system is absent.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, std::istream& in);

}  // namespace lipstab
