#pragma once

#include <Eigen/Dense>

namespace specsense {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Symmetric PSD matrix holding an error covariance (P_k, Y_k, their averages,
// or the performance target).
using CovarianceMatrix = Eigen::MatrixXd;

// How "Ybar <= Pbar" is decided.
enum class CovarianceOrder {
  Loewner,  // Pbar - Ybar is PSD
  Trace,    // trace(Ybar) <= trace(Pbar)
};

/// Maximum absolute eigenvalue; complex eigenvalues are handled.
double spectral_radius(const Matrix& m);

/// Number of singular values above rel_tol * (largest singular value).
int numerical_rank(const Matrix& m, double rel_tol = 1e-10);

Matrix symmetrize(const Matrix& m);

/// Smallest eigenvalue of the symmetric part of m.
double min_eigenvalue(const Matrix& m);

/// Symmetric square root of a PSD matrix. Negative eigenvalues from rounding
/// are clamped to zero.
Matrix psd_sqrt(const Matrix& m);

double max_abs(const Matrix& m);

/// lhs <= rhs in the requested order. In Loewner order the difference may
/// have eigenvalues down to -1e-9 * trace(rhs).
bool covariance_leq(const Matrix& lhs, const Matrix& rhs,
                    CovarianceOrder order = CovarianceOrder::Loewner);

bool is_symmetric(const Matrix& m, double rel_tol = 1e-12);

/// Symmetric and min eigenvalue >= -1e-9 * trace.
bool is_covariance(const Matrix& m);

}  // namespace specsense
