#include "specsense/cli/commands.hpp"

#include <cmath>
#include <sstream>

#include <spdlog/spdlog.h>

#include "specsense/simkit.hpp"

namespace specsense::cli {
namespace {

std::vector<Cell> solution_row(double first, const Solution& sol) {
  return {first,
          static_cast<long long>(sol.feasible ? sol.n_star : 0),
          sol.feasible ? sol.tau_star : 0.0,
          sol.feasible ? sol.phi_star : 0.0,
          sol.feasible ? sol.gamma_star : 0.0,
          sol.feasible};
}

void describe_solution(std::ostringstream& os, const Solution& sol) {
  os << "case " << static_cast<int>(sol.case_id) << ", n_bar_1 = ";
  if (sol.bounds.n_bar_1)
    os << *sol.bounds.n_bar_1;
  else
    os << "unbounded";
  os << ", n_bar_2 = " << sol.bounds.n_bar_2 << ", n_bar = " << sol.bounds.n_bar << "\n";
  for (const auto& r : sol.per_n) {
    os << "  n = " << r.n << ": ";
    if (r.feasible)
      os << "tau = " << format_number(r.tau) << " s, phi = " << format_number(r.phi)
         << ", gamma = " << format_number(r.gamma) << ", min gamma = "
         << format_number(r.gamma_floor) << ", candidates = " << r.candidates.size();
    else
      os << "infeasible";
    for (const auto& d : r.diagnostics) os << " [" << d << "]";
    os << "\n";
  }
  if (sol.feasible)
    os << "optimum: n* = " << sol.n_star << ", tau* = " << format_number(sol.tau_star)
       << " s, phi* = " << format_number(sol.phi_star) << "\n";
  else
    os << "no feasible (n, tau)\n";
}

void warn_assumptions(const ExperimentConfig& cfg, std::optional<double> tau,
                      std::ostringstream& report) {
  for (const auto& w : assumption_warnings(cfg, tau)) {
    spdlog::warn("{}", w);
    report << "warning: " << w << "\n";
  }
}

CommandResult run_solve(const ExperimentConfig& cfg) {
  CommandResult out;
  std::ostringstream report;
  const ProblemSpec spec = make_problem(cfg);
  const Solution sol = solve(spec);
  describe_solution(report, sol);
  warn_assumptions(cfg, sol.feasible ? std::optional(sol.tau_star) : std::nullopt, report);
  out.table.columns = kSolutionColumns;
  out.table.rows.push_back(solution_row(occupancy_probabilities(cfg.channel).idle, sol));
  out.exit_status = sol.feasible ? 0 : 1;
  out.report = report.str();
  return out;
}

CommandResult run_sweep(const ExperimentConfig& cfg) {
  CommandResult out;
  std::ostringstream report;
  const SweepSpec sweep = cfg.sweep.value_or(SweepSpec{});
  if (sweep.values.empty()) throw ConfigError(0, "sweep.values", "sweep needs values");
  const CovarianceMatrix target = resolve_target(cfg);
  const bool idle = sweep.variable == SweepVariable::IdleProbability;
  out.table.columns = kSolutionColumns;
  if (!idle) out.table.columns[0] = "energy_ratio";
  warn_assumptions(cfg, std::nullopt, report);

  bool all_feasible = true;
  for (double v : sweep.values) {
    ExperimentConfig point = cfg;
    if (idle)
      point.channel.beta = cfg.channel.alpha * v / (1.0 - v);
    else
      point.energy.e_tx = v * cfg.energy.e_s;
    const Solution sol = solve(make_problem(point, target));
    report << (idle ? "p_I = " : "e_tx/e_s = ") << format_number(v) << ": ";
    describe_solution(report, sol);
    all_feasible = all_feasible && sol.feasible;
    out.table.rows.push_back(solution_row(v, sol));
  }
  out.exit_status = all_feasible ? 0 : 1;
  out.report = report.str();
  return out;
}

CommandResult run_validate(const ExperimentConfig& cfg) {
  CommandResult out;
  std::ostringstream report;
  const ProblemSpec spec = make_problem(cfg);
  const Solution sol = solve(spec);
  describe_solution(report, sol);
  out.table.columns = {"quantity", "analytic", "empirical", "std_error", "relation", "pass"};
  if (!sol.feasible) {
    out.exit_status = 1;
    out.report = report.str();
    return out;
  }
  warn_assumptions(cfg, sol.tau_star, report);

  const MonteCarloConfig mc_cfg = cfg.monte_carlo.value_or(MonteCarloConfig{});
  MonteCarloOptions opts;
  opts.trials = mc_cfg.trials;
  opts.horizon = mc_cfg.horizon;
  opts.master_seed = mc_cfg.master_seed;
  opts.threads = mc_cfg.threads;
  const auto mc = monte_carlo(spec, sol.n_star, sol.tau_star, opts);

  const SensingConfig at_opt = spec.sensing.with_tau(sol.tau_star);
  const double gamma = reception_rate(at_opt, spec.channel);
  const double energy = average_energy(at_opt, spec.channel, spec.energy, sol.n_star);
  const double bound_trace = average_bound(spec.sys, gamma, sol.n_star).trace();
  const double target_trace = spec.P_bar.trace();

  auto matches = [](double analytic, const Estimate& e) {
    return std::abs(e.mean - analytic) <= 3.0 * e.std_error;
  };
  auto below = [](double bound, const Estimate& e) { return e.mean <= bound + 3.0 * e.std_error; };
  out.table.rows = {
      {std::string("gamma"), gamma, mc.gamma.mean, mc.gamma.std_error, std::string("match_3se"),
       matches(gamma, mc.gamma)},
      {std::string("energy_per_step"), energy, mc.energy_per_step.mean,
       mc.energy_per_step.std_error, std::string("match_3se"), matches(energy, mc.energy_per_step)},
      {std::string("avg_cov_trace_vs_bound"), bound_trace, mc.avg_cov_trace.mean,
       mc.avg_cov_trace.std_error, std::string("upper_bound_3se"),
       below(bound_trace, mc.avg_cov_trace)},
      {std::string("avg_cov_trace_vs_target"), target_trace, mc.avg_cov_trace.mean,
       mc.avg_cov_trace.std_error, std::string("upper_bound_3se"),
       below(target_trace, mc.avg_cov_trace)},
  };
  report << "monte carlo: " << mc.trials << " trials x " << mc.horizon << " steps, "
         << mc.diverged << " diverged\n";
  out.exit_status = mc.diverged == 0 ? 0 : 1;
  out.report = report.str();
  return out;
}

}  // namespace

Command parse_command(std::string_view name) {
  if (name == "solve") return Command::Solve;
  if (name == "sweep") return Command::Sweep;
  if (name == "validate") return Command::Validate;
  throw Error("unknown command '" + std::string(name) + "' (solve, sweep, validate)");
}

CommandResult run_command(const ExperimentConfig& cfg, Command command) {
  switch (command) {
    case Command::Solve:
      return run_solve(cfg);
    case Command::Sweep:
      return run_sweep(cfg);
    case Command::Validate:
      return run_validate(cfg);
  }
  throw Error("unhandled command");
}

}  // namespace specsense::cli
