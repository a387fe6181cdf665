#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sparseinr {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitIo = 2, kExitNumerical = 3 };

/// Runs the `sparseinr` command line. `args` excludes the program name.
/// Results go to `out`; progress, timing and diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sparseinr
