#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fbamp::cli {

/// Command-line entry point (subcommands: solve, sweep, fringe, fit, verify).
/// Exit codes: 0 success, 1 diagnostics or runtime failure, 2 verification
/// failure, 64 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fbamp::cli
