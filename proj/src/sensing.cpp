#include "specsense/sensing.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "specsense/errors.hpp"

namespace specsense {

void SensingConfig::validate() const {
  auto fail = [](const char* inv, const std::string& detail) { throw InvariantError(inv, detail); };
  if (!(tau_max >= 0.0)) fail("sensing.tau_max >= 0", "tau_max = " + std::to_string(tau_max));
  if (!(tau >= 0.0 && tau <= tau_max))
    fail("0 <= sensing.tau <= sensing.tau_max", "tau = " + std::to_string(tau));
  if (!(bandwidth > 0.0)) fail("sensing.bandwidth > 0", "W = " + std::to_string(bandwidth));
  if (!(eps_f > 0.0)) fail("sensing.eps_f > 0", "eps_f = " + std::to_string(eps_f));
  if (!(eps_d > eps_f))
    fail("sensing.eps_d > sensing.eps_f",
         "eps_d = " + std::to_string(eps_d) + ", eps_f = " + std::to_string(eps_f));
  if (!(t_x > 0.0)) fail("sensing.t_x > 0", "t_x = " + std::to_string(t_x));
}

double busy_threshold_factor(double eps_d, double snr_db) {
  return eps_d / (1.0 + std::pow(10.0, snr_db / 10.0));
}

void EnergyParams::validate() const {
  if (!(e_s >= 0.0)) throw InvariantError("energy.e_s >= 0", "e_s = " + std::to_string(e_s));
  if (!(e_tx >= 0.0)) throw InvariantError("energy.e_tx >= 0", "e_tx = " + std::to_string(e_tx));
  if (e_s == 0.0 && e_tx == 0.0) throw InvariantError("energy not both zero", "e_s = e_tx = 0");
}

double q_function(double z) {
  if (std::isnan(z)) throw std::domain_error("q_function: NaN argument");
  return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

DetectionProbabilities detection_probabilities(const SensingConfig& cfg) {
  const double root = std::sqrt(cfg.tau * cfg.bandwidth);
  return {q_function((1.0 - cfg.eps_d) * root), q_function((1.0 - cfg.eps_f) * root)};
}

double transmission_probability(const SensingConfig& cfg, const ChannelModel& ch) {
  const auto det = detection_probabilities(cfg);
  return (ch.beta * det.p_d + ch.alpha * det.p_f) / (ch.alpha + ch.beta);
}

double reception_rate(const SensingConfig& cfg, const ChannelModel& ch) {
  return max_reception_rate(ch, cfg.t_x) * detection_probabilities(cfg).p_d;
}

double max_reception_rate(const ChannelModel& ch, double t_x) {
  return occupancy_probabilities(ch).idle * hold_probability(ch, t_x);
}

double average_energy(const SensingConfig& cfg, const ChannelModel& ch, const EnergyParams& ep,
                      int n) {
  return (cfg.tau * ep.e_s + transmission_probability(cfg, ch) * ep.e_tx) / n;
}

ObjectiveEvaluation objective_and_derivatives(const SensingConfig& cfg, const ChannelModel& ch,
                                              const EnergyParams& ep, int n) {
  ObjectiveEvaluation out;
  out.phi_bar = average_energy(cfg, ch, ep, n);
  if (!(cfg.tau > 0.0)) return out;

  const double W = cfg.bandwidth;
  const double tau = cfg.tau;
  const double rho = ch.alpha / ch.beta;
  const double a_d = 1.0 - cfg.eps_d;
  const double a_f = 1.0 - cfg.eps_f;
  const double decay_d = std::exp(-0.5 * a_d * a_d * W * tau);
  const double decay_f = std::exp(-0.5 * a_f * a_f * W * tau);
  // d/dtau Q(a sqrt(W tau)) = -a sqrt(W) / (2 sqrt(2 pi tau)) exp(-a^2 W tau / 2)
  const double scale = std::sqrt(W) / (2.0 * std::sqrt(2.0 * std::numbers::pi * tau));

  ObjectiveDerivatives d;
  d.f_value = (cfg.eps_d - 1.0) * decay_d - rho * a_f * decay_f;
  d.d_gamma_d_tau = max_reception_rate(ch, cfg.t_x) * (cfg.eps_d - 1.0) * scale * decay_d;
  d.d_phi_d_tau = (ep.e_s + ep.e_tx * scale / (1.0 + rho) * d.f_value) / n;
  out.derivatives = d;
  return out;
}

}  // namespace specsense
