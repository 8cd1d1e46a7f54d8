#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coarse::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kNumericalError = 3 };

/// Runs the command line `args` (without the program name). Reports go to
/// `out`, diagnostics to `err`. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace coarse::cli
