#include "specsense/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "specsense/errors.hpp"

namespace specsense {

void ChannelModel::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw InvariantError("channel.alpha > 0", "alpha = " + std::to_string(alpha));
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw InvariantError("channel.beta > 0", "beta = " + std::to_string(beta));
}

Occupancy occupancy_probabilities(const ChannelModel& ch) {
  const double total = ch.alpha + ch.beta;
  return {ch.beta / total, ch.alpha / total};
}

double hold_probability(const ChannelModel& ch, double t_x) {
  if (t_x < 0.0) throw InvariantError("t_x >= 0", "t_x = " + std::to_string(t_x));
  return std::exp(-ch.alpha * t_x);
}

ChannelTrajectory::ChannelTrajectory(ChannelState start, std::vector<double> holding_times,
                                     double total_duration)
    : start_(start), holding_(std::move(holding_times)), total_(total_duration) {
  if (std::any_of(holding_.begin(), holding_.end(), [](double h) { return !(h > 0.0); }))
    throw InvariantError("holding times > 0", "non-positive holding time");
  ends_.resize(holding_.size());
  std::partial_sum(holding_.begin(), holding_.end(), ends_.begin());
  if (ends_.empty() || ends_.back() < total_)
    throw InvariantError("sum(holding times) >= total_duration", "trajectory too short");
}

std::size_t ChannelTrajectory::interval_index(double t) const {
  if (!(t >= 0.0 && t <= total_))
    throw QueryError("time " + std::to_string(t) + " outside [0, " + std::to_string(total_) + "]");
  auto it = std::upper_bound(ends_.begin(), ends_.end(), t);
  // t == total_ == ends_.back() falls off the end; it belongs to the last interval.
  if (it == ends_.end()) --it;
  return static_cast<std::size_t>(it - ends_.begin());
}

ChannelState ChannelTrajectory::state_at(double t) const {
  const std::size_t i = interval_index(t);
  const bool flipped = (i % 2) == 1;
  if (!flipped) return start_;
  return start_ == ChannelState::Idle ? ChannelState::Busy : ChannelState::Idle;
}

double ChannelTrajectory::residual_idle(double t) const {
  const std::size_t i = interval_index(t);
  if (state_at(t) != ChannelState::Idle) return 0.0;
  return ends_[i] - t;
}

ChannelTrajectory sample_trajectory(const ChannelModel& ch, double duration, Rng& rng) {
  const auto occ = occupancy_probabilities(ch);
  const ChannelState start = rng.bernoulli(occ.idle) ? ChannelState::Idle : ChannelState::Busy;
  return sample_trajectory(ch, duration, start, rng);
}

ChannelTrajectory sample_trajectory(const ChannelModel& ch, double duration, ChannelState start,
                                    Rng& rng) {
  ch.validate();
  if (!(duration > 0.0))
    throw InvariantError("duration > 0", "duration = " + std::to_string(duration));
  std::vector<double> holding;
  double elapsed = 0.0;
  ChannelState state = start;
  while (elapsed < duration) {
    const double rate = state == ChannelState::Idle ? ch.alpha : ch.beta;
    double h = rng.exponential(rate);
    // Exponential(rate) can round to exactly 0 for u == 0.
    if (!(h > 0.0)) h = std::numeric_limits<double>::min();
    holding.push_back(h);
    elapsed += h;
    state = state == ChannelState::Idle ? ChannelState::Busy : ChannelState::Idle;
  }
  return ChannelTrajectory(start, std::move(holding), duration);
}

}  // namespace specsense
