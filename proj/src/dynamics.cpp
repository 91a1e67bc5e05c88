#include "specsense/dynamics.hpp"

#include <algorithm>
#include <sstream>

#include "specsense/errors.hpp"

namespace specsense {
namespace {

std::string shape(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

Vector gaussian(const Matrix& cov_sqrt, Rng& rng) {
  Vector z(cov_sqrt.cols());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return cov_sqrt * z;
}

}  // namespace

void check_dimensions(const LinearSystem& sys) {
  const auto q1 = sys.A.rows();
  const auto q2 = sys.C.rows();
  auto fail = [&](const std::string& what) {
    throw DimensionError(what + " (A " + shape(sys.A) + ", C " + shape(sys.C) + ", Q " +
                         shape(sys.Q) + ", R " + shape(sys.R) + ")");
  };
  if (q1 == 0 || sys.A.cols() != q1) fail("A must be square and non-empty");
  if (q2 == 0 || sys.C.cols() != q1) fail("C must have as many columns as A");
  if (sys.Q.rows() != q1 || sys.Q.cols() != q1) fail("Q must match A");
  if (sys.R.rows() != q2 || sys.R.cols() != q2) fail("R must be square with C's row count");
}

bool ValidationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const InvariantCheck& ValidationReport::check(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw std::out_of_range("no validation check named " + name);
}

ValidationReport validate_system(const LinearSystem& sys) {
  check_dimensions(sys);
  ValidationReport report;
  const auto q1 = sys.state_dim();

  {
    const double lam = min_eigenvalue(sys.Q);
    std::ostringstream ev;
    ev << "min eigenvalue " << lam;
    report.checks.push_back({"Q_symmetric_psd",
                             is_symmetric(sys.Q) && lam >= -1e-9 * std::abs(sys.Q.trace()),
                             ev.str()});
  }
  {
    const double lam = min_eigenvalue(sys.R);
    std::ostringstream ev;
    ev << "min eigenvalue " << lam;
    report.checks.push_back({"R_symmetric_pd", is_symmetric(sys.R) && lam > 0.0, ev.str()});
  }
  {
    const int rank = numerical_rank(sys.C);
    std::ostringstream ev;
    ev << "rank " << rank << " of " << q1 << " columns";
    report.checks.push_back({"C_full_column_rank", rank == q1, ev.str()});
  }
  {
    // [Q^{1/2}, A Q^{1/2}, ..., A^{q1-1} Q^{1/2}]
    const Matrix q_half = psd_sqrt(sys.Q);
    Matrix ctrb(q1, q1 * q1);
    Matrix block = q_half;
    for (Eigen::Index i = 0; i < q1; ++i) {
      ctrb.middleCols(i * q1, q1) = block;
      block = sys.A * block;
    }
    const int rank = numerical_rank(ctrb);
    std::ostringstream ev;
    ev << "controllability matrix rank " << rank << " of " << q1;
    report.checks.push_back({"A_Qsqrt_controllable", rank == q1, ev.str()});
  }
  report.spectral_radius = spectral_radius(sys.A);
  return report;
}

StepResult simulate_step(const LinearSystem& sys, const Vector& x, Rng& rng) {
  check_dimensions(sys);
  if (x.size() != sys.state_dim())
    throw DimensionError("state vector has wrong length");
  StepResult out;
  out.x_next = sys.A * x + gaussian(psd_sqrt(sys.Q), rng);
  out.y = sys.C * out.x_next + gaussian(psd_sqrt(sys.R), rng);
  return out;
}

}  // namespace specsense
