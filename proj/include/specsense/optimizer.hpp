#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specsense/channel.hpp"
#include "specsense/dynamics.hpp"
#include "specsense/estimation.hpp"
#include "specsense/sensing.hpp"

namespace specsense {

/// Joint choice of sensing period n and sensing time tau. sensing.tau is
/// ignored; tau is the decision variable on [0, sensing.tau_max].
struct ProblemSpec {
  LinearSystem sys;
  ChannelModel channel;
  SensingConfig sensing;
  EnergyParams energy;
  CovarianceMatrix P_bar;
  CovarianceOrder order = CovarianceOrder::Loewner;

  void validate() const;
};

/// Shape of gamma(tau) and phi(tau) as determined by the detector thresholds
/// and rho = alpha / beta.
enum class SensingCase {
  Case1 = 1,  // gamma and phi both non-decreasing in tau
  Case2 = 2,  // gamma increasing; phi may rise, dip and rise again
  Case3 = 3,  // gamma increasing; phi convex
  Case4 = 4,  // gamma decreasing; phi convex
};

SensingCase classify_case(double eps_d, double eps_f, double rho);

struct NBounds {
  std::optional<int> n_bar_1;  // empty when rho(A) <= 1
  int n_bar_2 = 0;             // 0 when the target is unreachable even at n = 1
  int n_bar = 0;
};

/// Upper limits on the sensing period: n_bar_1 from mean-square stability at
/// the idle probability, n_bar_2 from the performance target at the largest
/// achievable reception rate.
NBounds n_bounds(const ProblemSpec& spec);

struct SubproblemResult {
  int n = 0;
  bool feasible = false;
  double gamma_floor = 0.0;
  double tau = 0.0;
  double phi = 0.0;
  double gamma = 0.0;
  std::vector<double> candidates;
  std::vector<std::string> diagnostics;
};

/// Minimises phi(tau) for fixed n subject to gamma(tau) >= gamma_floor by
/// evaluating the case-specific candidate set: the left end, stationary points
/// of phi, the constraint boundary and tau_max.
SubproblemResult solve_subproblem(const ProblemSpec& spec, int n, double gamma_floor);

struct Solution {
  bool feasible = false;
  int n_star = 0;
  double tau_star = 0.0;
  double phi_star = 0.0;
  double gamma_star = 0.0;
  SensingCase case_id = SensingCase::Case1;
  NBounds bounds;
  std::vector<SubproblemResult> per_n;
};

Solution solve(const ProblemSpec& spec);

/// Exhaustive search over n = 1..n_bar_1 and a tau grid of tau_grid_size
/// points: tau = 0 followed by a geometric grid ending at tau_max. Test oracle
/// for solve().
Solution brute_force_solve(const ProblemSpec& spec, int tau_grid_size);

/// Same, with an explicit tau grid.
Solution brute_force_solve(const ProblemSpec& spec, std::span<const double> tau_grid);

/// Periods beyond this are not scanned when no finite stability bound exists.
inline constexpr int kPeriodScanLimit = 1000;

}  // namespace specsense
