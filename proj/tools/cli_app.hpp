#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace capdist::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kOk = 0, kInputError = 2, kInfeasible = 3, kNotConverged = 4 };

/// Runs the command line `args` (args[0] is the program name) and returns the
/// process exit code. Normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace capdist::cli
