#pragma once

#include <optional>

#include "specsense/channel.hpp"

namespace specsense {

/// Energy-detector configuration. tau * bandwidth is the detector's sample
/// count; eps_d and eps_f scale the decision threshold under the idle and busy
/// hypotheses respectively.
struct SensingConfig {
  double tau = 0.0;      // sensing time [s]
  double tau_max = 0.0;  // upper bound on tau [s]
  double bandwidth = 0.0;  // [samples/s]
  double eps_d = 0.0;
  double eps_f = 0.0;
  double t_x = 0.0;  // packet transmit time [s]

  void validate() const;

  SensingConfig with_tau(double t) const {
    SensingConfig c = *this;
    c.tau = t;
    return c;
  }
};

/// Busy-hypothesis threshold factor obtained by equating the two detector
/// thresholds: eps_d * noise / (signal + noise) = eps_d / (1 + snr).
double busy_threshold_factor(double eps_d, double snr_db);

struct EnergyParams {
  double e_s = 0.0;   // per second of sensing
  double e_tx = 0.0;  // per transmitted packet

  void validate() const;
};

/// Gaussian upper tail probability, 0.5 * erfc(z / sqrt(2)). Throws
/// std::domain_error for NaN.
double q_function(double z);

struct DetectionProbabilities {
  double p_d = 0.0;  // declare idle | idle
  double p_f = 0.0;  // declare idle | busy
};

DetectionProbabilities detection_probabilities(const SensingConfig& cfg);

/// p_I p_d + p_B p_f.
double transmission_probability(const SensingConfig& cfg, const ChannelModel& ch);

/// p_I * exp(-alpha t_x) * p_d: idle, detected idle, and idle for the whole
/// packet.
double reception_rate(const SensingConfig& cfg, const ChannelModel& ch);

/// Supremum of the reception rate over all sensing times (p_d -> 1).
double max_reception_rate(const ChannelModel& ch, double t_x);

/// Mean energy per step when sensing every n steps.
double average_energy(const SensingConfig& cfg, const ChannelModel& ch, const EnergyParams& ep,
                      int n);

struct ObjectiveDerivatives {
  double d_phi_d_tau = 0.0;
  double d_gamma_d_tau = 0.0;
  /// Sign-determining factor of d_phi_d_tau:
  /// (eps_d-1) e^{-(1-eps_d)^2 W tau/2} - rho (1-eps_f) e^{-(1-eps_f)^2 W tau/2}.
  double f_value = 0.0;
};

struct ObjectiveEvaluation {
  double phi_bar = 0.0;
  /// Empty at tau = 0, where both derivatives blow up like tau^{-1/2}.
  std::optional<ObjectiveDerivatives> derivatives;
};

ObjectiveEvaluation objective_and_derivatives(const SensingConfig& cfg, const ChannelModel& ch,
                                              const EnergyParams& ep, int n);

}  // namespace specsense
