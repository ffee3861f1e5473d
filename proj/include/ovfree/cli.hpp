#pragma once

// ovfree <command> --in <path> --out <path> [--order N] [--level L] [--depth D] [--tol T]

namespace ovfree {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitPrecondition = 3;

/// Runs one command; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace ovfree
