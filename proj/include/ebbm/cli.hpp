#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ebbm/harness.hpp"

namespace ebbm {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDegenerate = 3;

inline constexpr int kResultVersion = 1;

/// Flat key=value lines; `#` starts a comment. Keys: n, N, H_true, J_grid
/// (comma separated), prior, repeats, seed, delta_beta, sweeps. Unknown keys
/// raise InputError naming the key.
ExperimentConfig parse_experiment_config(std::istream& in);

/// Runs the tool with args[0] as the program name. Never throws.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ebbm
