#pragma once

// Small dense-matrix helpers shared by the model, estimator and analysis code.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <string>

#include "spfdi/errors.hpp"

namespace spfdi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix symmetrize(const Matrix& x) { return 0.5 * (x + x.transpose()); }

inline double max_abs(const Matrix& x) { return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff(); }

inline bool all_finite(const Matrix& x) { return x.allFinite(); }

/// Smallest eigenvalue of the symmetric part of x.
inline double min_eigenvalue(const Matrix& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(x), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline bool is_symmetric(const Matrix& x, double tol = 1e-10) {
  return x.rows() == x.cols() && max_abs(x - x.transpose()) <= tol * std::max(1.0, max_abs(x));
}

/// PSD test in the sense used throughout: symmetric and eigenvalues >= -tol.
inline bool is_psd(const Matrix& x, double tol = 1e-10) {
  return is_symmetric(x, tol) && min_eigenvalue(x) >= -tol;
}

/// True when a - b is PSD up to tol (Loewner order a >= b).
inline bool psd_dominates(const Matrix& a, const Matrix& b, double tol) {
  return min_eigenvalue(a - b) >= -tol;
}

inline double spectral_radius(const Matrix& a) {
  Eigen::EigenSolver<Matrix> es(a, false);
  double r = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) r = std::max(r, std::abs(es.eigenvalues()[i]));
  return r;
}

/// Symmetric square root factor G with G*G^T = x, tolerating semi-definite input.
/// Eigenvalues in [-1e-12, 0) are clamped to zero; anything more negative fails.
inline Matrix psd_sqrt_factor(const Matrix& x, const std::string& name) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(x));
  if (es.info() != Eigen::Success) {
    throw ModelError(ModelError::Reason::definiteness, name, name + ": eigendecomposition failed");
  }
  Vector d = es.eigenvalues();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d[i] < -1e-12) {
      throw ModelError(ModelError::Reason::definiteness, name,
                       name + " is not positive semi-definite (eigenvalue " + std::to_string(d[i]) + ")");
    }
    d[i] = d[i] > 0.0 ? std::sqrt(d[i]) : 0.0;
  }
  return es.eigenvectors() * d.asDiagonal();
}

}  // namespace spfdi
