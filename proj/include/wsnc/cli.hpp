#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wsnc::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInfeasible = 2;

/// CSV column order, bumped whenever a column is added, removed or moved.
inline constexpr int kCsvSchema = 1;

/// Run one command line (without the program name). Rows go to `out` (or the
/// --out file), diagnostics to `err`. Returns one of the exit codes above.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wsnc::cli
