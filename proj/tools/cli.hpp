#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace alctrie::cli {

enum ExitCode : int { kOk = 0, kRuntimeError = 1, kUsageError = 2 };

/// Runs the command line `args` (without the program name). Results go to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses "a..b" (inclusive), "a,b,c" or a single value.
std::vector<double> parse_range(const std::string& text);

}  // namespace alctrie::cli
