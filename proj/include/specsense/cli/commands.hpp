#pragma once

#include <string>
#include <string_view>

#include "specsense/cli/config.hpp"
#include "specsense/cli/output.hpp"

namespace specsense::cli {

enum class Command { Solve, Sweep, Validate };

Command parse_command(std::string_view name);

struct CommandResult {
  /// 0 iff every result is feasible and every computation converged.
  int exit_status = 0;
  Table table;
  /// Per-period diagnostics and assumption warnings, for humans.
  std::string report;
};

/// solve: one row for the configured problem.
/// sweep: one row per sweep value. idle_probability sets beta = alpha p/(1-p)
///   with alpha fixed; energy_ratio sets e_tx = ratio * e_s. The target stays
///   at the base configuration's matrix.
/// validate: solve, then Monte Carlo at the optimum; analytic vs. empirical rows.
CommandResult run_command(const ExperimentConfig& cfg, Command command);

/// Column names of solve and idle-probability sweep output.
inline const std::vector<std::string> kSolutionColumns = {
    "p_I", "n_star", "tau_star_s", "phi_star", "gamma_star", "feasible"};

}  // namespace specsense::cli
