#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "specsense/errors.hpp"
#include "specsense/sensing.hpp"

using namespace specsense;

namespace {

// Frozen from a 40-digit erfc/exp evaluation.
constexpr double kEpsF = 0.799367309499746;
constexpr double kPd1e4 = 0.997661132509476;
constexpr double kPf1e4 = 0.00227430967874461;
constexpr double kPtx1e4 = 0.79858376794333;
constexpr double kGammaMax = 0.623040626457124;
constexpr double kGamma1e4 = 0.621583416990628;

const ChannelModel kChannel{5.0, 20.0};

SensingConfig reference_sensing(double tau) {
  SensingConfig s;
  s.tau = tau;
  s.tau_max = 0.02;
  s.bandwidth = 2e6;
  s.eps_d = 1.2;
  s.eps_f = kEpsF;
  s.t_x = 0.05;
  return s;
}

// Detector tails 1 - p_d and p_f through erfc. Differencing the tails keeps
// the central differences free of cancellation against values near 1.
double miss_tail(double tau) { return 0.5 * std::erfc(0.2 * std::sqrt(tau * 2e6) / std::sqrt(2.0)); }
double false_idle_tail(double tau) {
  return 0.5 * std::erfc((1.0 - kEpsF) * std::sqrt(tau * 2e6) / std::sqrt(2.0));
}

template <class F>
double central_difference(F f, double tau, double h) {
  return (f(tau + h) - f(tau - h)) / (2 * h);
}

}  // namespace

TEST_CASE("q_function") {
  CHECK(q_function(0.0) == 0.5);
  CHECK(q_function(1.0) == doctest::Approx(0.158655253931457).epsilon(1e-13));
  CHECK(q_function(-2.8284) == doctest::Approx(0.997660934304533).epsilon(1e-13));
  CHECK(q_function(30.0) > 0.0);
  CHECK_THROWS_AS(q_function(std::nan("")), std::domain_error);
}

TEST_CASE("busy threshold factor from the SNR") {
  CHECK(busy_threshold_factor(1.2, -3.0) == doctest::Approx(kEpsF).epsilon(1e-13));
  CHECK(busy_threshold_factor(1.2, -300.0) == doctest::Approx(1.2));
}

TEST_CASE("detection probabilities") {
  auto dp = detection_probabilities(reference_sensing(0.0));
  CHECK(dp.p_d == 0.5);
  CHECK(dp.p_f == 0.5);
  dp = detection_probabilities(reference_sensing(1e-4));
  CHECK(dp.p_d == doctest::Approx(kPd1e4).epsilon(1e-12));
  CHECK(dp.p_f == doctest::Approx(kPf1e4).epsilon(1e-10));
}

TEST_CASE("transmission probability") {
  CHECK(transmission_probability(reference_sensing(0.0), kChannel) == doctest::Approx(0.5));
  CHECK(transmission_probability(reference_sensing(1e-4), kChannel) ==
        doctest::Approx(kPtx1e4).epsilon(1e-11));
  const auto cfg = reference_sensing(1e-4);
  CHECK(std::abs(transmission_probability(cfg, {5.0, 1e9}) - detection_probabilities(cfg).p_d) <
        1e-6);
}

TEST_CASE("reception rate") {
  CHECK(max_reception_rate(kChannel, 0.05) == doctest::Approx(kGammaMax).epsilon(1e-13));
  CHECK(reception_rate(reference_sensing(0.0), kChannel) ==
        doctest::Approx(0.5 * kGammaMax).epsilon(1e-13));
  CHECK(reception_rate(reference_sensing(1e-4), kChannel) ==
        doctest::Approx(kGamma1e4).epsilon(1e-11));
  CHECK(reception_rate(reference_sensing(0.02), kChannel) <= kGammaMax);
}

TEST_CASE("objective at zero sensing time") {
  const EnergyParams ep{100.0, 100.0};
  const auto eval = objective_and_derivatives(reference_sensing(0.0), kChannel, ep, 1);
  CHECK(eval.phi_bar == doctest::Approx(50.0));
  CHECK_FALSE(eval.derivatives.has_value());
  CHECK(average_energy(reference_sensing(1e-3), kChannel, ep, 4) ==
        doctest::Approx(objective_and_derivatives(reference_sensing(1e-3), kChannel, ep, 4).phi_bar));
}

TEST_CASE("derivatives against central differences") {
  const EnergyParams ep{100.0, 100.0};
  const double p_i = 0.8, p_b = 0.2, eta = std::exp(-0.25);
  for (double tau : {1e-6, 1e-5, 1e-4, 1e-3}) {
    const double h = 1e-5 * tau;
    const auto d = *objective_and_derivatives(reference_sensing(tau), kChannel, ep, 1).derivatives;
    const double d_miss = central_difference(miss_tail, tau, h);
    const double d_false = central_difference(false_idle_tail, tau, h);
    const double fd_gamma = -p_i * eta * d_miss;
    const double fd_phi = ep.e_s + ep.e_tx * (-p_i * d_miss + p_b * d_false);
    CHECK(std::abs(d.d_gamma_d_tau - fd_gamma) <= 1e-4 * std::abs(fd_gamma));
    CHECK(std::abs(d.d_phi_d_tau - fd_phi) <= 1e-4 * std::abs(fd_phi));
  }
}

TEST_CASE("f is non-negative when both thresholds are at least one") {
  const EnergyParams ep{1.0, 10.0};
  for (double tau = 1e-7; tau < 0.1; tau *= 1.7) {
    auto cfg = reference_sensing(tau);
    cfg.eps_d = 1.5;
    cfg.eps_f = 1.1;
    cfg.tau_max = 0.1;
    CHECK(objective_and_derivatives(cfg, kChannel, ep, 2).derivatives->f_value >= 0.0);
  }
}

TEST_CASE("only the product tau W enters the detector") {
  for (double c : {0.5, 3.0, 17.0}) {
    auto a = reference_sensing(1e-4);
    auto b = a;
    b.bandwidth *= c;
    b.tau /= c;
    CHECK(detection_probabilities(a).p_d == doctest::Approx(detection_probabilities(b).p_d).epsilon(1e-13));
    CHECK(detection_probabilities(a).p_f == doctest::Approx(detection_probabilities(b).p_f).epsilon(1e-12));
    CHECK(reception_rate(a, kChannel) == doctest::Approx(reception_rate(b, kChannel)).epsilon(1e-13));
  }
}

TEST_CASE("factorisation and ordering properties over a tau grid") {
  for (double tau = 1e-7; tau <= 0.02; tau *= 1.5) {
    const auto cfg = reference_sensing(tau);
    const auto dp = detection_probabilities(cfg);
    const double p_tx = transmission_probability(cfg, kChannel);
    const double gamma = reception_rate(cfg, kChannel);
    CHECK(gamma == doctest::Approx(0.8 * std::exp(-0.25) * dp.p_d).epsilon(1e-14));
    CHECK(p_tx >= std::min(dp.p_d, dp.p_f) - 1e-15);
    CHECK(p_tx <= std::max(dp.p_d, dp.p_f) + 1e-15);
    if (dp.p_f > 0) CHECK(gamma < p_tx);
  }
}

TEST_CASE("sensing and energy validation") {
  auto cfg = reference_sensing(0.03);
  CHECK_THROWS_AS(cfg.validate(), InvariantError);
  cfg = reference_sensing(1e-4);
  CHECK_NOTHROW(cfg.validate());
  cfg.bandwidth = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvariantError);
  CHECK_THROWS_AS((EnergyParams{-1.0, 1.0}.validate()), InvariantError);
}
