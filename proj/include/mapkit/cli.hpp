#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mapkit::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

/// Entry point for the `mapkit` tool. Data goes to `out` (or files named on
/// the command line); diagnostics go to `err` as `ERROR[<code>]: ...`.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mapkit::cli
