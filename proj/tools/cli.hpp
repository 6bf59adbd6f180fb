#pragma once

#include <ostream>

namespace revmarkov::cli {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitSolver = 3;

/// Parses argv and runs one subcommand: solve, generate, simulate, oracle,
/// bench or decompose. Output that is not written to files goes to `out`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace revmarkov::cli
