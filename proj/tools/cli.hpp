#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cefrlab {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitUsage = 2, kExitData = 3 };

/// Runs one subcommand. `args` excludes the program name. Reports go to
/// `out` unless an --out path is given; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cefrlab
