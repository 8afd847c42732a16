#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pwrctl {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitInvalidInput = 2,
  kExitInfeasible = 3,
  kExitNoConvergence = 4,
  kExitInternal = 5,
};

/// Runs one command. `args` excludes the program name. Reports go to `out`,
/// diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses "LO:HI:STEP" into the inclusive list of points.
std::vector<double> parse_range(const std::string& spec);

}  // namespace pwrctl
