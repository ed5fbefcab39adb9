#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace jamiton::io {

/// Exit codes of the command line.
enum ExitCode : int {
  exit_ok = 0,
  exit_negative = 2,  ///< no jamiton / no unstable band
  exit_config = 3,
  exit_numerical = 4,
};

/// Runs one command line (args[0] is the program name). Data goes to files
/// and `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cli_dispatch(int argc, const char* const* argv);

}  // namespace jamiton::io
