#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace shapedtw::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 2,
  kDataError = 3,
  kInternalError = 4,
};

/// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace shapedtw::cli
