#include "specsense/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <spdlog/spdlog.h>

#include "specsense/errors.hpp"

namespace specsense {
namespace {

constexpr double kTauWidth = 1e-9;  // bisection width on tau [s]
constexpr int kScanPoints = 64;     // log grid used to bracket stationary points
constexpr double kTieTolerance = 1e-12;

struct Objective {
  const ProblemSpec& spec;
  int n;

  double gamma(double tau) const {
    return reception_rate(spec.sensing.with_tau(tau), spec.channel);
  }
  double phi(double tau) const {
    return average_energy(spec.sensing.with_tau(tau), spec.channel, spec.energy, n);
  }
  double slope(double tau) const {
    return objective_and_derivatives(spec.sensing.with_tau(tau), spec.channel, spec.energy, n)
        .derivatives->d_phi_d_tau;
  }
};

double rho_of(const ChannelModel& ch) { return ch.alpha / ch.beta; }

// Bisection on a sign change of g between lo and hi; returns the endpoint of
// the final bracket on which `keep_lo` says the answer lives.
template <class Pred>
double bisect(double lo, double hi, Pred lo_side, bool keep_lo) {
  while (hi - lo > kTauWidth) {
    const double mid = 0.5 * (lo + hi);
    (lo_side(mid) ? lo : hi) = mid;
  }
  return keep_lo ? lo : hi;
}

// Roots of d(phi)/d(tau) on (0, tau_max], bracketed on a log grid.
std::vector<double> stationary_points(const Objective& obj, std::vector<std::string>& diag) {
  const double tau_max = obj.spec.sensing.tau_max;
  std::vector<double> roots;
  if (!(tau_max > 0.0)) return roots;
  const double tau_lo = std::min(tau_max * 1e-3, 1e-2 / obj.spec.sensing.bandwidth);
  const double ratio = std::pow(tau_max / tau_lo, 1.0 / (kScanPoints - 1));

  double prev_tau = tau_lo;
  double prev = obj.slope(prev_tau);
  for (int i = 1; i < kScanPoints; ++i) {
    const double tau = i == kScanPoints - 1 ? tau_max : tau_lo * std::pow(ratio, i);
    const double cur = obj.slope(tau);
    if (!std::isfinite(cur) || !std::isfinite(prev)) {
      diag.push_back("non-finite slope while bracketing stationary points");
    } else if (prev == 0.0) {
      roots.push_back(prev_tau);
    } else if ((prev < 0.0) != (cur < 0.0) && cur != 0.0) {
      const bool prev_negative = prev < 0.0;
      roots.push_back(bisect(
          prev_tau, tau, [&](double t) { return (obj.slope(t) < 0.0) == prev_negative; },
          /*keep_lo=*/true));
    }
    prev_tau = tau;
    prev = cur;
  }
  if (prev == 0.0) roots.push_back(prev_tau);
  return roots;
}

SubproblemResult infeasible(int n, double gamma_floor, std::string why) {
  SubproblemResult r;
  r.n = n;
  r.gamma_floor = gamma_floor;
  r.diagnostics.push_back(std::move(why));
  return r;
}

bool better(double phi, int n, double best_phi, int best_n) {
  const double tie = kTieTolerance * std::abs(best_phi);
  if (phi < best_phi - tie) return true;
  return phi <= best_phi + tie && n > best_n;
}

void pick_optimum(Solution& sol) {
  sol.feasible = false;
  for (const auto& r : sol.per_n) {
    if (!r.feasible) continue;
    if (!sol.feasible || better(r.phi, r.n, sol.phi_star, sol.n_star)) {
      sol.feasible = true;
      sol.n_star = r.n;
      sol.tau_star = r.tau;
      sol.phi_star = r.phi;
      sol.gamma_star = r.gamma;
    }
  }
}

MinGammaOptions min_gamma_options(const ProblemSpec& spec) {
  MinGammaOptions opts;
  opts.order = spec.order;
  return opts;
}

}  // namespace

void ProblemSpec::validate() const {
  check_dimensions(sys);
  channel.validate();
  sensing.validate();
  energy.validate();
  if (P_bar.rows() != sys.state_dim() || P_bar.cols() != sys.state_dim())
    throw DimensionError("performance target must match the state dimension");
  if (!is_covariance(P_bar))
    throw InvariantError("P_bar symmetric PSD", "performance target is not a covariance");
}

SensingCase classify_case(double eps_d, double eps_f, double rho) {
  if (eps_d >= 1.0 && eps_f >= 1.0) return SensingCase::Case1;
  if (eps_d < 1.0) return SensingCase::Case4;
  // eps_d >= 1 > eps_f from here on.
  // f starts at (1 - eps_f)(ratio - rho) as tau -> 0. For rho > 1 the ratio
  // can exceed 1 while staying below rho; f then starts negative and phi falls
  // first, the Case3 shape.
  const double ratio = (eps_d - 1.0) / (1.0 - eps_f);
  if (ratio < rho) return SensingCase::Case3;
  if (ratio > 1.0) return SensingCase::Case2;
  return SensingCase::Case1;
}

NBounds n_bounds(const ProblemSpec& spec) {
  NBounds b;
  const double radius = spectral_radius(spec.sys.A);
  const double alpha = spec.channel.alpha;
  const double beta = spec.channel.beta;
  if (radius > 1.0) {
    const double x = (std::log(alpha + beta) - std::log(alpha)) / (2.0 * std::log(radius));
    b.n_bar_1 = std::max(0, static_cast<int>(std::ceil(x)) - 1);
  }

  // When rho(A) > 1 the scan stops on its own once gamma_max can no longer
  // stabilise the bound.
  const int cap = kPeriodScanLimit;
  const double gamma_max = max_reception_rate(spec.channel, spec.sensing.t_x);
  auto within = [&](int n) {
    return bound_within(spec.sys, gamma_max, n, spec.P_bar, spec.order);
  };
  int n = 0;
  while (n < cap) {
    if (within(n + 1)) {
      ++n;
      continue;
    }
    // The bound is monotone in n, so the first failure should be final.
    if (n + 2 <= cap && within(n + 2)) {
      spdlog::warn("performance bound not monotone in n at n = {}; continuing scan", n + 1);
      n += 2;
      continue;
    }
    break;
  }
  if (n == kPeriodScanLimit)
    spdlog::warn("period scan reached its limit of {} without violating the target", n);
  b.n_bar_2 = n;
  b.n_bar = b.n_bar_1 ? std::min(*b.n_bar_1, n) : n;
  return b;
}

SubproblemResult solve_subproblem(const ProblemSpec& spec, int n, double gamma_floor) {
  const Objective obj{spec, n};
  const double tau_max = spec.sensing.tau_max;
  const SensingCase c = classify_case(spec.sensing.eps_d, spec.sensing.eps_f, rho_of(spec.channel));
  auto feasible = [&](double tau) { return obj.gamma(tau) >= gamma_floor; };

  // Boundary of the feasible tau set. gamma is non-decreasing in tau unless
  // eps_d < 1, where it is decreasing.
  const bool increasing = c != SensingCase::Case4;
  const double g0 = obj.gamma(0.0);
  const double g1 = obj.gamma(tau_max);
  double tau_gamma = 0.0;
  if (increasing) {
    if (g1 < gamma_floor)
      return infeasible(n, gamma_floor, "gamma(tau_max) below the required reception rate");
    tau_gamma = g0 >= gamma_floor
                    ? 0.0
                    : bisect(0.0, tau_max, [&](double t) { return !feasible(t); }, false);
  } else {
    if (g0 < gamma_floor)
      return infeasible(n, gamma_floor, "gamma(0) below the required reception rate");
    tau_gamma = g1 >= gamma_floor ? tau_max
                                  : bisect(0.0, tau_max, feasible, /*keep_lo=*/true);
  }

  SubproblemResult r;
  r.n = n;
  r.gamma_floor = gamma_floor;
  if (c == SensingCase::Case1) {
    r.candidates = {std::min(tau_max, tau_gamma)};
  } else {
    if (c == SensingCase::Case2) r.candidates.push_back(0.0);
    for (double t : stationary_points(obj, r.diagnostics)) r.candidates.push_back(t);
    r.candidates.push_back(tau_gamma);
    r.candidates.push_back(tau_max);
  }

  for (double tau : r.candidates) {
    if (!feasible(tau)) continue;
    const double phi = obj.phi(tau);
    if (!r.feasible || phi < r.phi || (phi == r.phi && tau < r.tau)) {
      r.feasible = true;
      r.tau = tau;
      r.phi = phi;
      r.gamma = obj.gamma(tau);
    }
  }
  if (!r.feasible) r.diagnostics.push_back("no candidate satisfies the reception constraint");
  return r;
}

Solution solve(const ProblemSpec& spec) {
  spec.validate();
  Solution sol;
  sol.case_id = classify_case(spec.sensing.eps_d, spec.sensing.eps_f, rho_of(spec.channel));
  sol.bounds = n_bounds(spec);
  const auto opts = min_gamma_options(spec);
  for (int n = 1; n <= sol.bounds.n_bar; ++n) {
    const auto floor = min_gamma(spec.sys, n, spec.P_bar, opts);
    if (!floor) {
      sol.per_n.push_back(infeasible(n, 1.0, "target unreachable even with every packet received"));
      continue;
    }
    sol.per_n.push_back(solve_subproblem(spec, n, *floor));
  }
  pick_optimum(sol);
  return sol;
}

Solution brute_force_solve(const ProblemSpec& spec, int tau_grid_size) {
  // tau = 0 plus a geometric grid: the detector's sample count tau * W spans
  // several decades and phi is steepest at small tau.
  const double tau_max = spec.sensing.tau_max;
  std::vector<double> grid{tau_max};
  if (tau_grid_size >= 2) {
    const auto size = static_cast<std::size_t>(tau_grid_size);
    grid.assign(size, 0.0);
    const double tau_lo = std::min(tau_max * 1e-3, 1e-2 / spec.sensing.bandwidth);
    const double log_ratio = std::log(tau_max / tau_lo) / static_cast<double>(size - 2);
    for (std::size_t i = 1; i < size; ++i)
      grid[i] = tau_lo * std::exp(log_ratio * static_cast<double>(i - 1));
    grid.back() = tau_max;
  }
  return brute_force_solve(spec, grid);
}

Solution brute_force_solve(const ProblemSpec& spec, std::span<const double> tau_grid) {
  spec.validate();
  Solution sol;
  sol.case_id = classify_case(spec.sensing.eps_d, spec.sensing.eps_f, rho_of(spec.channel));
  const double radius = spectral_radius(spec.sys.A);
  int n_max = kPeriodScanLimit;
  if (radius > 1.0) {
    const double x = (std::log(spec.channel.alpha + spec.channel.beta) -
                      std::log(spec.channel.alpha)) /
                     (2.0 * std::log(radius));
    n_max = std::max(0, static_cast<int>(std::ceil(x)) - 1);
    sol.bounds.n_bar_1 = n_max;
  }
  sol.bounds.n_bar = n_max;

  const auto opts = min_gamma_options(spec);
  for (int n = 1; n <= n_max; ++n) {
    const auto floor = min_gamma(spec.sys, n, spec.P_bar, opts);
    SubproblemResult r;
    r.n = n;
    r.gamma_floor = floor.value_or(1.0);
    if (floor) {
      const Objective obj{spec, n};
      for (double tau : tau_grid) {
        const double g = obj.gamma(tau);
        if (g < *floor) continue;
        const double phi = obj.phi(tau);
        if (!r.feasible || phi < r.phi) {
          r.feasible = true;
          r.tau = tau;
          r.phi = phi;
          r.gamma = g;
        }
      }
    }
    sol.per_n.push_back(std::move(r));
  }
  pick_optimum(sol);
  return sol;
}

}  // namespace specsense
