#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lcorder::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolated = 1;
inline constexpr int kExitInput = 2;

/// Runs the command line `args` (without the program name). Results go to
/// `out`, diagnostics to `err`; the return value is the process exit code.
int run(std::vector<std::string> const& args, std::ostream& out, std::ostream& err);

} // namespace lcorder::cli
