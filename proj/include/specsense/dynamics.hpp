#pragma once

#include <string>
#include <vector>

#include "specsense/linalg.hpp"
#include "specsense/random.hpp"

namespace specsense {

/// Linear time-invariant plant
///   x_{k+1} = A x_k + w_k,   w_k ~ N(0, Q)
///   y_k     = C x_k + v_k,   v_k ~ N(0, R)
struct LinearSystem {
  Matrix A;
  Matrix C;
  Matrix Q;
  Matrix R;

  Eigen::Index state_dim() const { return A.rows(); }
  Eigen::Index measurement_dim() const { return C.rows(); }
};

/// Throws DimensionError unless A, C, Q, R have consistent shapes.
void check_dimensions(const LinearSystem& sys);

struct InvariantCheck {
  std::string name;
  bool passed = false;
  std::string evidence;
};

struct ValidationReport {
  std::vector<InvariantCheck> checks;
  double spectral_radius = 0.0;

  bool ok() const;
  const InvariantCheck& check(const std::string& name) const;
};

/// Checks the modelling assumptions: Q symmetric PSD, R symmetric PD, C with
/// full column rank and (A, Q^{1/2}) controllable. Shape errors throw
/// DimensionError rather than producing a failed check.
ValidationReport validate_system(const LinearSystem& sys);

struct StepResult {
  Vector x_next;
  Vector y;  // measurement of x_next
};

StepResult simulate_step(const LinearSystem& sys, const Vector& x, Rng& rng);

}  // namespace specsense
