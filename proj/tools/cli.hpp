#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ccstat::cli {

enum ExitCode : int {
  kSuccess = 0,
  kConfigError = 2,
  kDataError = 3,
  kDegenerateResult = 4,
};

/// Runs one command line (args excludes the program name) and returns the
/// process exit code. Reports go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ccstat::cli
