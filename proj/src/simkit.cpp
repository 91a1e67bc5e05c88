#include "specsense/simkit.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "specsense/errors.hpp"

namespace specsense {
namespace {

template <class Fn>
void parallel_for(long count, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max(1L, count))));
  if (threads == 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (long i = next++; i < count; i = next++) fn(i);
    });
}

// Neumaier-compensated sum, evaluated in index order.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

template <class Get>
Estimate estimate(std::span<const TrialResult> trials, Get get, bool skip_diverged = false) {
  CompensatedSum sum;
  long count = 0;
  for (const auto& t : trials) {
    if (skip_diverged && t.diverged) continue;
    sum.add(get(t));
    ++count;
  }
  Estimate e;
  if (count == 0) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
  e.mean = sum.value() / static_cast<double>(count);
  if (count > 1) {
    CompensatedSum sq;
    for (const auto& t : trials) {
      if (skip_diverged && t.diverged) continue;
      const double d = get(t) - e.mean;
      sq.add(d * d);
    }
    e.std_error = std::sqrt(sq.value() / static_cast<double>(count - 1) /
                            static_cast<double>(count));
  }
  return e;
}

}  // namespace

ReceptionEvent simulate_reception_event(const SensingConfig& sense, const ChannelModel& ch,
                                        Rng& rng) {
  const auto traj = sample_trajectory(ch, sense.t_x, rng);
  const bool idle = traj.state_at(0.0) == ChannelState::Idle;
  const auto det = detection_probabilities(sense);
  if (!rng.bernoulli(idle ? det.p_d : det.p_f)) return ReceptionEvent::NoTransmit;
  if (idle && traj.residual_idle(0.0) >= sense.t_x) return ReceptionEvent::Received;
  return ReceptionEvent::TransmittedCollided;
}

TrialResult run_trial(const ProblemSpec& spec, int n, double tau, long horizon, Rng& rng) {
  if (n < 1) throw InvariantError("n >= 1", "n = " + std::to_string(n));
  const SensingConfig sense = spec.sensing.with_tau(tau);
  TrialResult r;
  r.horizon = horizon;
  CovarianceMatrix P = spec.sys.Q;
  CovarianceMatrix sum = CovarianceMatrix::Zero(P.rows(), P.cols());
  for (long k = 1; k <= horizon; ++k) {
    if (k % n == 0) {
      ++r.sensing_events;
      const auto ev = simulate_reception_event(sense, spec.channel, rng);
      if (ev != ReceptionEvent::NoTransmit) ++r.packets_attempted;
      const bool received = ev == ReceptionEvent::Received;
      if (received) ++r.packets_received;
      P = correct_cov(P, spec.sys, received);
    } else {
      P = predict_cov(P, spec.sys);
    }
    const double tr = P.trace();
    if (!std::isfinite(tr) || tr > kDivergenceTrace) {
      r.diverged = true;
      break;
    }
    sum += P;
  }
  r.total_energy = static_cast<double>(r.sensing_events) * tau * spec.energy.e_s +
                   static_cast<double>(r.packets_attempted) * spec.energy.e_tx;
  r.energy_per_step = horizon > 0 ? r.total_energy / static_cast<double>(horizon) : 0.0;
  r.avg_cov_trace = r.diverged ? std::numeric_limits<double>::infinity()
                               : sum.trace() / static_cast<double>(horizon);
  return r;
}

std::vector<TrialResult> run_trials(const ProblemSpec& spec, int n, double tau,
                                    const MonteCarloOptions& opts) {
  if (opts.trials < 1) throw InvariantError("trials >= 1", "trials = " + std::to_string(opts.trials));
  std::vector<TrialResult> results(static_cast<std::size_t>(opts.trials));
  parallel_for(opts.trials, opts.threads, [&](long i) {
    Rng rng(derive_seed(opts.master_seed, static_cast<std::uint64_t>(i)));
    results[static_cast<std::size_t>(i)] = run_trial(spec, n, tau, opts.horizon, rng);
  });
  return results;
}

MonteCarloSummary summarize(std::span<const TrialResult> trials) {
  MonteCarloSummary s;
  s.trials = static_cast<long>(trials.size());
  for (const auto& t : trials) {
    if (t.diverged) ++s.diverged;
    s.horizon = t.horizon;
  }
  s.avg_cov_trace = estimate(trials, [](const auto& t) { return t.avg_cov_trace; }, true);
  s.energy_per_step = estimate(trials, [](const auto& t) { return t.energy_per_step; });
  s.packets_attempted =
      estimate(trials, [](const auto& t) { return static_cast<double>(t.packets_attempted); });
  s.packets_received =
      estimate(trials, [](const auto& t) { return static_cast<double>(t.packets_received); });
  s.gamma = estimate(trials, [](const auto& t) {
    return t.sensing_events > 0
               ? static_cast<double>(t.packets_received) / static_cast<double>(t.sensing_events)
               : 0.0;
  });
  s.empirical_gamma = s.gamma.mean;
  return s;
}

MonteCarloSummary monte_carlo(const ProblemSpec& spec, int n, double tau,
                              const MonteCarloOptions& opts) {
  const auto results = run_trials(spec, n, tau, opts);
  return summarize(results);
}

std::vector<double> covariance_trace_path(const LinearSystem& sys, double gamma, int n,
                                          long horizon, Rng& rng) {
  std::vector<double> path(static_cast<std::size_t>(horizon),
                           std::numeric_limits<double>::infinity());
  CovarianceMatrix P = sys.Q;
  for (long k = 1; k <= horizon; ++k) {
    const bool sensing = k % n == 0;
    P = sensing ? correct_cov(P, sys, rng.bernoulli(gamma)) : predict_cov(P, sys);
    const double tr = P.trace();
    if (!std::isfinite(tr) || tr > kDivergenceTrace) break;
    path[static_cast<std::size_t>(k - 1)] = tr;
  }
  return path;
}

TracePathStats covariance_trace_stats(const LinearSystem& sys, double gamma, int n, long horizon,
                                      const MonteCarloOptions& opts) {
  std::vector<std::vector<double>> paths(static_cast<std::size_t>(opts.trials));
  parallel_for(opts.trials, opts.threads, [&](long i) {
    Rng rng(derive_seed(opts.master_seed, static_cast<std::uint64_t>(i)));
    paths[static_cast<std::size_t>(i)] = covariance_trace_path(sys, gamma, n, horizon, rng);
  });
  TracePathStats stats;
  stats.mean.resize(static_cast<std::size_t>(horizon));
  stats.std_error.resize(static_cast<std::size_t>(horizon));
  const double count = static_cast<double>(opts.trials);
  for (std::size_t k = 0; k < stats.mean.size(); ++k) {
    CompensatedSum sum;
    for (const auto& p : paths) sum.add(p[k]);
    const double mean = sum.value() / count;
    CompensatedSum sq;
    if (std::isfinite(mean) && opts.trials > 1)
      for (const auto& p : paths) sq.add((p[k] - mean) * (p[k] - mean));
    stats.mean[k] = mean;
    stats.std_error[k] =
        opts.trials > 1 && std::isfinite(mean) ? std::sqrt(sq.value() / (count - 1) / count) : 0.0;
  }
  return stats;
}

}  // namespace specsense
