#pragma once

namespace llob::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;  ///< config or input schema error
inline constexpr int kExitSolver = 3;  ///< numerical solver failure
inline constexpr int kExitStat = 4;    ///< statistical failure

/// Entry point shared by the binary and the in-process tests.
/// Subcommands: simulate, scaling-fn, synth, fit.
int run(int argc, const char* const* argv);

}  // namespace llob::cli
