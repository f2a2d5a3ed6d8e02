#pragma once

#include <iosfwd>

namespace ccofdma {

// Exit codes of dispatch.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInfeasible = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Parses `argv` (argv[0] is the program name), runs the subcommand and
/// returns its exit code. Diagnostics go to `err`, summaries to `out`.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int dispatch(int argc, const char* const* argv);

}  // namespace ccofdma
