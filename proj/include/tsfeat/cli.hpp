#pragma once

#include <iosfwd>

namespace tsfeat::cli {

/// Exit codes: 0 ok, 2 usage or schema error, 3 degenerate data,
/// 4 numerical failure, 5 internal error.
enum ExitCode : int { kOk = 0, kUsage = 2, kDegenerate = 3, kNumerical = 4, kInternal = 5 };

/// Entry point of the `tsfeat` command. Messages go to `out` and `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tsfeat::cli
