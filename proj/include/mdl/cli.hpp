#pragma once

#include <string>
#include <vector>

namespace mdl::cli {

/// Exit codes: 0 success, 1 usage error, 2 region error, 3 budget error.
struct RunResult {
  int exit_code = 0;
  std::string out; // report (JSON or CSV) on stdout
  std::string err; // structured error text on stderr
};

/// Parses argv-style arguments and runs the requested subcommand.
/// Never throws; everything is reported through RunResult.
RunResult run(const std::vector<std::string>& args);

} // namespace mdl::cli
