#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace roman::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitParse = 2;      // unreadable or malformed input data
inline constexpr int kExitConfig = 3;     // bad flags, invalid config, infeasible geometry
inline constexpr int kExitMissing = 4;    // missing baseline or ensemble member
inline constexpr int kExitIo = 5;         // file system failures

/// Runs the `roman` command line. `args` excludes the program name. Data goes
/// to `out` when no --out path is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace roman::cli
