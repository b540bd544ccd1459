#pragma once

#include <string>

namespace fractherm::cli {

/// Exit codes shared by all subcommands: 0 for reached-horizon / converged /
/// certificate holds, 2 for informative negative outcomes (escape, hypothesis
/// or order violation), 1 for solver failure and I/O or config errors.
int run_solve(const std::string& config_path, bool quiet = false);
int run_converge(const std::string& config_path, bool quiet = false);
int run_validate(const std::string& config_path, bool quiet = false);

}  // namespace fractherm::cli
