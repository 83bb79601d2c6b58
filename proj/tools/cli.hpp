#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sadyn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitUsage = 64;

/// Runs `sadyn <subcommand> [flags]`. args excludes the program name.
///
/// Subcommands: simulate, jacobian-check, lyapunov, energy, bounds,
/// oscillator, regularize. Shared flags: --config PATH, --seed U64,
/// --out DIR, --preset {desk, paper}. Every output file lands in the output
/// directory together with config.json (the resolved configuration) and,
/// where weights are drawn, weights.archive.
///
/// Returns 0 on success, 1 for invalid input, 2 for numerical failure and 64
/// for a missing or unknown subcommand.
int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sadyn::cli
