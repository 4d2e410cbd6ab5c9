#pragma once

#include <iosfwd>

namespace alphacf::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kCheckFailed = 3 };

/// Runs the command line; results go to `out` unless --out names a file,
/// diagnostics and progress go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace alphacf::cli
