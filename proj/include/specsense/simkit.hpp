#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "specsense/optimizer.hpp"
#include "specsense/random.hpp"

namespace specsense {

enum class ReceptionEvent { Received, TransmittedCollided, NoTransmit };

/// One sensing-then-transmit attempt. The channel state and its residual idle
/// time come from a sampled occupancy trajectory, so the hold probability is
/// never used in closed form here.
ReceptionEvent simulate_reception_event(const SensingConfig& sense, const ChannelModel& ch,
                                        Rng& rng);

struct TrialResult {
  double avg_cov_trace = 0.0;  // trace of the time-averaged P_k, +inf if diverged
  double energy_per_step = 0.0;
  double total_energy = 0.0;
  long sensing_events = 0;
  long packets_attempted = 0;
  long packets_received = 0;
  long horizon = 0;
  bool diverged = false;
};

/// Covariance traces above this are reported as divergence.
inline constexpr double kDivergenceTrace = 1e15;

/// Simulates steps k = 1..horizon from P_0 = Q, sensing when k is a multiple
/// of n. Meaningful averages need horizon >= 10 n.
TrialResult run_trial(const ProblemSpec& spec, int n, double tau, long horizon, Rng& rng);

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

struct MonteCarloSummary {
  Estimate avg_cov_trace;  // over trials that did not diverge
  Estimate energy_per_step;
  Estimate packets_attempted;
  Estimate packets_received;
  Estimate gamma;  // per-trial received / sensing events
  double empirical_gamma = 0.0;
  long trials = 0;
  long diverged = 0;
  long horizon = 0;
};

struct MonteCarloOptions {
  long trials = 1;
  long horizon = 1000;
  std::uint64_t master_seed = 0;
  unsigned threads = 1;
};

/// Trial i uses seed derive_seed(master_seed, i); results are independent of
/// the thread count.
std::vector<TrialResult> run_trials(const ProblemSpec& spec, int n, double tau,
                                    const MonteCarloOptions& opts);

MonteCarloSummary summarize(std::span<const TrialResult> trials);

MonteCarloSummary monte_carlo(const ProblemSpec& spec, int n, double tau,
                              const MonteCarloOptions& opts);

/// trace(P_k), k = 1..horizon, for the random covariance recursion with
/// Bernoulli(gamma) receptions at sensing steps. Entries after divergence are
/// +inf.
std::vector<double> covariance_trace_path(const LinearSystem& sys, double gamma, int n,
                                          long horizon, Rng& rng);

struct TracePathStats {
  std::vector<double> mean;
  std::vector<double> std_error;
};

/// Per-step mean and standard error of covariance_trace_path over trials.
TracePathStats covariance_trace_stats(const LinearSystem& sys, double gamma, int n,
                                      long horizon, const MonteCarloOptions& opts);

}  // namespace specsense
