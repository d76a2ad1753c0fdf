#pragma once

#include <iosfwd>

namespace riskdiff::cli {

// Process exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitDomain = 2;
inline constexpr int kExitDegenerate = 3;

// Parses the command line, runs one subcommand and writes its report to
// `out` (or to --output). Diagnostics go to `err`. Returns the exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace riskdiff::cli
