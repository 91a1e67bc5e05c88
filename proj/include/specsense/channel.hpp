#pragma once

#include <span>
#include <vector>

#include "specsense/random.hpp"

namespace specsense {

/// Exponential on/off occupancy. Idle periods have rate alpha (mean 1/alpha s),
/// busy periods rate beta (mean 1/beta s).
struct ChannelModel {
  double alpha = 0.0;
  double beta = 0.0;

  /// Throws InvariantError if either rate is not strictly positive.
  void validate() const;
};

struct Occupancy {
  double idle = 0.0;
  double busy = 0.0;
};

/// Stationary probabilities: idle = beta/(alpha+beta), busy = alpha/(alpha+beta).
Occupancy occupancy_probabilities(const ChannelModel& ch);

/// Probability that a channel idle now stays idle for t_x more seconds,
/// exp(-alpha * t_x).
double hold_probability(const ChannelModel& ch, double t_x);

enum class ChannelState { Idle, Busy };

class ChannelTrajectory {
 public:
  ChannelTrajectory(ChannelState start, std::vector<double> holding_times, double total_duration);

  ChannelState start_state() const { return start_; }
  std::span<const double> holding_times() const { return holding_; }
  double total_duration() const { return total_; }

  /// State of the interval covering t (intervals are half-open [start, end)).
  /// Throws QueryError for t outside [0, total_duration].
  ChannelState state_at(double t) const;

  /// Time left in the idle interval covering t, or 0 if the channel is busy.
  double residual_idle(double t) const;

 private:
  std::size_t interval_index(double t) const;

  ChannelState start_;
  std::vector<double> holding_;
  std::vector<double> ends_;  // cumulative interval end times
  double total_;
};

/// Start state drawn from the stationary distribution.
ChannelTrajectory sample_trajectory(const ChannelModel& ch, double duration, Rng& rng);

ChannelTrajectory sample_trajectory(const ChannelModel& ch, double duration, ChannelState start,
                                    Rng& rng);

}  // namespace specsense
