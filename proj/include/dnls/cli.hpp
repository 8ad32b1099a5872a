#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dnls {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  /// Bad arguments, configuration or input files.
  kExitUserError = 2,
  /// Numerical failure, or a `check` run whose diagnostics did not pass.
  kExitFailure = 3,
};

/// Run the dnlslab tool on `args` (without the program name). Errors are
/// reported on `err` as a single-line JSON record.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dnls
