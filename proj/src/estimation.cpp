#include "specsense/estimation.hpp"

#include <cmath>
#include <string>

#include "specsense/errors.hpp"

namespace specsense {
namespace {

enum class BoundStatus { Converged, ExceedsCeiling, NotConverged };

struct BoundIteration {
  BoundStatus status = BoundStatus::NotConverged;
  CovarianceMatrix average;
};

struct Ceiling {
  const CovarianceMatrix& matrix;
  CovarianceOrder order;
};

// Preallocated temporaries for the cycle loop, which runs up to millions of
// steps near the stability boundary.
struct CycleWorkspace {
  explicit CycleWorkspace(const LinearSystem& sys)
      : q1(sys.state_dim()), m(sys.measurement_dim()),
        AY(q1, q1), AYCt(q1, m), S(m, m), gain(m, q1), ldlt(m) {}

  // Y <- A Y A^T + Q - [sensing] gamma A Y C^T S^{-1} C Y A^T, in place.
  void step(Matrix& Y, const LinearSystem& sys, bool sensing, double gamma) {
    AY.noalias() = sys.A * Y;
    if (sensing && gamma > 0.0) {
      AYCt.noalias() = AY * sys.C.transpose();
      S = sys.R;
      S.noalias() += sys.C * Y * sys.C.transpose();
      ldlt.compute(S);
      gain = ldlt.solve(AYCt.transpose());
      Y = sys.Q;
      Y.noalias() += AY * sys.A.transpose();
      Y.noalias() -= gamma * (AYCt * gain);
    } else {
      Y = sys.Q;
      Y.noalias() += AY * sys.A.transpose();
    }
    Y = 0.5 * (Y + Y.transpose()).eval();
  }

  Eigen::Index q1, m;
  Matrix AY, AYCt, S, gain;
  Eigen::LDLT<Matrix> ldlt;
};

// Cycle averages only ever grow from Q, so checking the ceiling every few
// cycles delays the early exit by at most that many cycles.
constexpr long kCeilingCheckStride = 8;

// Iterates whole sensing cycles: one corrected step followed by n-1 pure
// predictions. The cycle average of the converged limit cycle is the long-run
// average of the sequence.
BoundIteration iterate_cycles(const LinearSystem& sys, double gamma, int n,
                              const CovarianceMatrix& Y0, const BoundOptions& opts,
                              const Ceiling* ceiling) {
  BoundIteration out;
  CycleWorkspace ws(sys);
  Matrix x = Y0;
  Matrix sensed(ws.q1, ws.q1), previous_sensed(ws.q1, ws.q1), sum(ws.q1, ws.q1);
  double previous_step = 0.0;
  for (long iter = 0; iter < opts.max_iter; ++iter) {
    ws.step(x, sys, true, gamma);
    sensed = x;
    sum = x;
    for (int j = 1; j < n; ++j) {
      ws.step(x, sys, false, gamma);
      sum += x;
    }
    if (!sum.allFinite()) {
      out.average = sum / static_cast<double>(n);
      return out;
    }
    bool converged = false;
    if (iter > 0) {
      // Geometric tail: with step d and contraction r the remaining distance
      // to the limit is about d / (1 - r).
      const double scale = std::max(1.0, max_abs(sensed));
      const double step = (sensed - previous_sensed).cwiseAbs().maxCoeff();
      const double ratio = previous_step > 0.0 ? step / previous_step : 0.0;
      converged = step == 0.0 || (ratio < 1.0 && step / (1.0 - ratio) < opts.tol * scale);
      previous_step = step;
    }
    if (ceiling && (converged || iter % kCeilingCheckStride == 0)) {
      out.average = sum / static_cast<double>(n);
      if (!covariance_leq(out.average, ceiling->matrix, ceiling->order)) {
        out.status = BoundStatus::ExceedsCeiling;
        return out;
      }
    }
    if (converged) {
      out.average = sum / static_cast<double>(n);
      out.status = BoundStatus::Converged;
      return out;
    }
    previous_sensed.swap(sensed);
  }
  out.average = sum / static_cast<double>(n);
  return out;
}

void check_gamma_and_period(double gamma, int n) {
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw InvariantError("0 <= gamma <= 1", "gamma = " + std::to_string(gamma));
  if (n < 1) throw InvariantError("n >= 1", "n = " + std::to_string(n));
}

}  // namespace

CovarianceMatrix predict_cov(const CovarianceMatrix& P, const LinearSystem& sys) {
  return sys.A * P * sys.A.transpose() + sys.Q;
}

CovarianceMatrix corrected_cov_gain_form(const CovarianceMatrix& P, const LinearSystem& sys) {
  const Matrix PCt = P * sys.C.transpose();
  const Matrix S = sys.C * PCt + sys.R;
  Eigen::LDLT<Matrix> ldlt(S);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw Error("innovation covariance C P C^T + R is not invertible");
  const Matrix posterior = P - PCt * ldlt.solve(PCt.transpose());
  return sys.A * posterior * sys.A.transpose() + sys.Q;
}

CovarianceMatrix corrected_cov_information_form(const CovarianceMatrix& P,
                                                const LinearSystem& sys) {
  Eigen::LLT<Matrix> p_llt(P);
  Eigen::LLT<Matrix> r_llt(sys.R);
  if (p_llt.info() != Eigen::Success || r_llt.info() != Eigen::Success)
    throw Error("information form requires P and R positive definite");
  const auto q1 = P.rows();
  const Matrix info = p_llt.solve(Matrix::Identity(q1, q1)) +
                      sys.C.transpose() * r_llt.solve(sys.C);
  const Matrix upsilon = info.llt().solve(Matrix::Identity(q1, q1));
  return sys.A * upsilon * sys.A.transpose() + sys.Q;
}

CovarianceMatrix correct_cov(const CovarianceMatrix& P, const LinearSystem& sys, bool received) {
  if (!received) return predict_cov(P, sys);
  // The information form needs P^{-1}; for (near-)singular P the gain form is
  // exact and used instead.
  Eigen::LLT<Matrix> p_llt(P);
  if (p_llt.info() == Eigen::Success) {
    const Vector d = p_llt.matrixLLT().diagonal();
    if (d.minCoeff() > 1e-6 * d.maxCoeff()) return corrected_cov_information_form(P, sys);
  }
  return corrected_cov_gain_form(P, sys);
}

FilterState kf_step(const FilterState& fs, const LinearSystem& sys,
                    const std::optional<Vector>& measurement) {
  check_dimensions(sys);
  if (fs.x_pred.size() != sys.state_dim() || fs.P.rows() != sys.state_dim() ||
      fs.P.cols() != sys.state_dim())
    throw DimensionError("filter state does not match the system dimension");
  if (measurement && measurement->size() != sys.measurement_dim())
    throw DimensionError("measurement has wrong length");

  FilterState next;
  next.k = fs.k + 1;
  next.x_filt = fs.x_pred;
  Matrix posterior = fs.P;
  if (measurement) {
    const Matrix PCt = fs.P * sys.C.transpose();
    const Matrix S = sys.C * PCt + sys.R;
    const Matrix K = S.ldlt().solve(PCt.transpose()).transpose();
    next.x_filt = fs.x_pred + K * (*measurement - sys.C * fs.x_pred);
    posterior = fs.P - K * sys.C * fs.P;
  }
  next.x_pred = sys.A * next.x_filt;
  next.P = symmetrize(sys.A * posterior * sys.A.transpose() + sys.Q);
  return next;
}

CovarianceMatrix bound_step(const CovarianceMatrix& Y, const LinearSystem& sys, bool sensing_step,
                            double gamma) {
  CovarianceMatrix next = predict_cov(Y, sys);
  if (!sensing_step || gamma == 0.0) return next;
  const Matrix AYCt = sys.A * Y * sys.C.transpose();
  const Matrix S = sys.C * Y * sys.C.transpose() + sys.R;
  next -= gamma * AYCt * S.ldlt().solve(AYCt.transpose());
  return next;
}

bool is_stable(const LinearSystem& sys, double gamma, int n) {
  const double radius = spectral_radius(sys.A);
  return (1.0 - gamma) * std::pow(radius, 2.0 * n) < 1.0;
}

double stability_threshold(const LinearSystem& sys, int n) {
  const double radius = spectral_radius(sys.A);
  if (radius < 1.0) return 0.0;
  return 1.0 - std::pow(radius, -2.0 * n);
}

CovarianceMatrix average_bound_from(const LinearSystem& sys, double gamma, int n,
                                    const CovarianceMatrix& Y0, const BoundOptions& opts) {
  check_gamma_and_period(gamma, n);
  if (!is_stable(sys, gamma, n))
    throw InstabilityError("bound diverges: (1 - gamma) rho(A)^(2n) >= 1 for gamma = " +
                           std::to_string(gamma) + ", n = " + std::to_string(n));
  const auto result = iterate_cycles(sys, gamma, n, Y0, opts, nullptr);
  if (result.status != BoundStatus::Converged)
    throw ConvergenceError("average bound did not converge within " +
                           std::to_string(opts.max_iter) + " cycles (gamma = " +
                           std::to_string(gamma) + ", n = " + std::to_string(n) + ")");
  return result.average;
}

CovarianceMatrix average_bound(const LinearSystem& sys, double gamma, int n,
                               const BoundOptions& opts) {
  return average_bound_from(sys, gamma, n, sys.Q, opts);
}

bool bound_within(const LinearSystem& sys, double gamma, int n, const CovarianceMatrix& ceiling,
                  CovarianceOrder order, const BoundOptions& opts) {
  check_gamma_and_period(gamma, n);
  if (!is_stable(sys, gamma, n)) return false;
  const Ceiling c{ceiling, order};
  const auto result = iterate_cycles(sys, gamma, n, sys.Q, opts, &c);
  return result.status == BoundStatus::Converged;
}

std::optional<double> min_gamma(const LinearSystem& sys, int n, const CovarianceMatrix& P_bar,
                                const MinGammaOptions& opts) {
  auto feasible = [&](double g) { return bound_within(sys, g, n, P_bar, opts.order, opts.bound); };
  if (!feasible(1.0)) return std::nullopt;
  if (feasible(0.0)) return 0.0;
  // Everything at or below the stability threshold is infeasible.
  double lo = stability_threshold(sys, n);
  double hi = 1.0;
  while (hi - lo > opts.tol) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace specsense
