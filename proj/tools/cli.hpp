#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace condgan::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;

/// Runs one command line (args exclude the program name).  Machine-readable
/// results go to `out` as a single JSON line; progress and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace condgan::cli
