#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lrncount::cli {

/// Exit codes: 0 success, 1 runtime failure (including diverged runs),
/// 2 theorem inconsistency found by `verify`.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInconsistent = 2;

/// Runs the command line `args` (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lrncount::cli
