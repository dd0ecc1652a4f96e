#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace phaseplan::cli {

enum ExitStatus { kSuccess = 0, kInfeasible = 1, kInputError = 2 };

/// Runs one command line (arguments without the program name). Data goes to
/// `out` (or the --output file), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace phaseplan::cli
