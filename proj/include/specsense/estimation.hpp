#pragma once

#include <optional>

#include "specsense/dynamics.hpp"
#include "specsense/linalg.hpp"

namespace specsense {

/// Filter carried between steps. x_pred and P are the one-step predictions
/// x_{k|k-1}, P_{k|k-1}; x_filt is the latest filtered estimate x_{k-1|k-1}.
struct FilterState {
  Vector x_pred;
  CovarianceMatrix P;
  Vector x_filt;
  long k = 0;
};

/// A P A^T + Q.
CovarianceMatrix predict_cov(const CovarianceMatrix& P, const LinearSystem& sys);

/// Next prediction covariance after a step with (received) or without a
/// measurement. With a measurement the information form
/// A (P^{-1} + C^T R^{-1} C)^{-1} A^T + Q is used when P is safely invertible,
/// otherwise the gain form.
CovarianceMatrix correct_cov(const CovarianceMatrix& P, const LinearSystem& sys, bool received);

/// A P A^T + Q - A P C^T (C P C^T + R)^{-1} C P A^T.
CovarianceMatrix corrected_cov_gain_form(const CovarianceMatrix& P, const LinearSystem& sys);

/// A (P^{-1} + C^T R^{-1} C)^{-1} A^T + Q. Requires P positive definite.
CovarianceMatrix corrected_cov_information_form(const CovarianceMatrix& P,
                                                const LinearSystem& sys);

/// One step of the Kalman filter with intermittent observations. The update
/// term is applied only when a measurement is present.
FilterState kf_step(const FilterState& fs, const LinearSystem& sys,
                    const std::optional<Vector>& measurement);

/// Deterministic upper-bound recursion:
/// Y' = A Y A^T + Q - [sensing] gamma A Y C^T (C Y C^T + R)^{-1} C Y A^T.
CovarianceMatrix bound_step(const CovarianceMatrix& Y, const LinearSystem& sys,
                            bool sensing_step, double gamma);

/// (1 - gamma) rho(A)^{2n} < 1.
bool is_stable(const LinearSystem& sys, double gamma, int n);

/// Largest gamma for which is_stable fails, 1 - rho(A)^{-2n}; 0 if rho(A) < 1.
double stability_threshold(const LinearSystem& sys, int n);

struct BoundOptions {
  /// Convergence when the distance to the limit, extrapolated from the last
  /// two steps between sensing-instant iterates, is below tol * max(1, max|Y|)
  /// entrywise.
  double tol = 1e-12;
  long max_iter = 1000000;
};

/// Long-run average of the bound sequence with one sensing step every n steps,
/// started from Y_0 = Q. Throws InstabilityError if !is_stable(gamma, n) and
/// ConvergenceError if max_iter cycles do not converge.
CovarianceMatrix average_bound(const LinearSystem& sys, double gamma, int n,
                               const BoundOptions& opts = {});

/// Same limit from an arbitrary initial covariance.
CovarianceMatrix average_bound_from(const LinearSystem& sys, double gamma, int n,
                                    const CovarianceMatrix& Y0, const BoundOptions& opts = {});

/// is_stable(gamma, n) and average_bound(gamma, n) <= ceiling. Exits early once
/// a cycle average already exceeds the ceiling: started from Q the cycle
/// averages increase monotonically. Non-convergence counts as false.
bool bound_within(const LinearSystem& sys, double gamma, int n, const CovarianceMatrix& ceiling,
                  CovarianceOrder order = CovarianceOrder::Loewner,
                  const BoundOptions& opts = {});

struct MinGammaOptions {
  double tol = 1e-6;
  CovarianceOrder order = CovarianceOrder::Loewner;
  BoundOptions bound;
};

/// Smallest reception rate meeting the performance target with period n,
/// found by bisection (the bound is monotone in gamma). The returned value is
/// itself feasible and within tol of the boundary. Empty if even gamma = 1
/// misses the target.
std::optional<double> min_gamma(const LinearSystem& sys, int n, const CovarianceMatrix& P_bar,
                                const MinGammaOptions& opts = {});

}  // namespace specsense
