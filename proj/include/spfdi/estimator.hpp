#pragma once

// Event-based remote MMSE estimator.
//
//   time update:        x^-_k = A x_{k-1},  P^-_k = h(P_{k-1}),  h(X) = A X A^T + Q
//   whitening:          F_k F_k^T = (C P^-_k C^T + R)^{-1},  eps_k = F_k^T z_k
//   scheduler:          gamma_k = 1 iff ||eps_k||_inf > beta
//   measurement update: x_k = x^-_k + gamma_k K_k F_k^{-T} eps_k
//                       P_k = gamma_k q(P^-_k) + (1 - gamma_k) q_{kappa(beta)}(P^-_k)
//
// F is fixed to L^{-T} for the lower Cholesky factor S = L L^T, so F^{-T} = L.

#include <string>

#include "spfdi/linalg.hpp"
#include "spfdi/model.hpp"
#include "spfdi/specfun.hpp"

namespace spfdi {

struct FilterState {
  Vector x_prior;
  Vector x_post;
  Matrix P_prior;
  Matrix P_post;
  Matrix K;        // P^- C^T S^{-1}
  Matrix F;        // F F^T = S^{-1}
  Matrix F_inv_T;  // F^{-T}, the lower Cholesky factor of S
  Matrix S;        // C P^- C^T + R
  bool gamma = false;
};

struct SteadyState {
  Matrix P;  // steady prior covariance, fixed point of h o q
  Matrix K;
  Matrix F;
  Matrix F_inv_T;
  Matrix S;
  int iterations = 0;

  /// Kalman posterior covariance q(P).
  Matrix P_post(const SystemModel& model) const;
};

inline Matrix op_h(const Matrix& X, const SystemModel& model) {
  if (X.rows() != model.n() || X.cols() != model.n()) throw DomainError("op_h: dimension mismatch");
  return symmetrize(model.A() * X * model.A().transpose() + model.Q());
}

/// q_lambda(X) = X - lambda X C^T [C X C^T + R]^{-1} C X.
inline Matrix op_q_tilde(const Matrix& X, double lambda, const SystemModel& model) {
  if (X.rows() != model.n() || X.cols() != model.n()) throw DomainError("op_q_tilde: dimension mismatch");
  const Matrix S = symmetrize(model.C() * X * model.C().transpose() + model.R());
  Eigen::LLT<Matrix> llt(S);
  if (llt.info() != Eigen::Success) throw NumericError("op_q_tilde: C X C^T + R is not positive definite");
  const Matrix CX = model.C() * X;
  return symmetrize(X - lambda * CX.transpose() * llt.solve(CX));
}

inline Matrix op_q_tilde(const Matrix& X, const SystemModel& model) { return op_q_tilde(X, 1.0, model); }

namespace detail {

struct Whitening {
  Matrix S, L, F;
};

inline Whitening whitening(const Matrix& P_prior, const SystemModel& model) {
  Whitening w;
  w.S = symmetrize(model.C() * P_prior * model.C().transpose() + model.R());
  Eigen::LLT<Matrix> llt(w.S);
  if (llt.info() != Eigen::Success) throw NumericError("C P C^T + R is not positive definite");
  w.L = llt.matrixL();
  const Matrix I = Matrix::Identity(w.S.rows(), w.S.cols());
  w.F = llt.matrixL().solve(I).transpose();
  return w;
}

inline void refresh_gains(FilterState& s, const SystemModel& model) {
  auto w = whitening(s.P_prior, model);
  // K = P C^T S^{-1}, solved through the Cholesky factor.
  const Matrix PCt = s.P_prior * model.C().transpose();
  s.K = Eigen::LLT<Matrix>(w.S).solve(PCt.transpose()).transpose();
  s.S = std::move(w.S);
  s.F = std::move(w.F);
  s.F_inv_T = std::move(w.L);
}

}  // namespace detail

/// F = L^{-T} with S = C P C^T + R = L L^T.
inline Matrix mahalanobis_factor(const Matrix& P_prior, const SystemModel& model) {
  return detail::whitening(P_prior, model).F;
}

/// Filter at k = 0: prior mean 0, prior covariance Xi0, posterior not yet formed.
inline FilterState initial_filter_state(const SystemModel& model) {
  FilterState s;
  s.x_prior = Vector::Zero(model.n());
  s.x_post = s.x_prior;
  s.P_prior = model.Xi0();
  s.P_post = s.P_prior;
  detail::refresh_gains(s, model);
  return s;
}

inline FilterState time_update(const FilterState& prev, const SystemModel& model) {
  FilterState s;
  s.x_prior = model.A() * prev.x_post;
  s.x_post = s.x_prior;
  s.P_prior = op_h(prev.P_post, model);
  s.P_post = s.P_prior;
  detail::refresh_gains(s, model);
  if (!s.P_prior.allFinite()) throw NumericError("time_update: covariance diverged");
  return s;
}

inline Vector innovation(const Vector& y, const Vector& x_prior, const SystemModel& model) {
  return y - model.C() * x_prior;
}

inline Vector transform_innovation(const Vector& z, const Matrix& F) { return F.transpose() * z; }

/// 0 when ||eps||_inf <= beta, 1 otherwise.
inline bool schedule(const Vector& eps, double beta) {
  if (beta < 0.0) throw DomainError("schedule: beta must be nonnegative");
  return eps.size() > 0 && eps.cwiseAbs().maxCoeff() > beta;
}

/// The estimator does not know whether eps_received was modified in transit.
inline FilterState measurement_update(const FilterState& state, const Vector& eps_received, bool gamma,
                                      double beta, const SystemModel& model) {
  FilterState s = state;
  s.gamma = gamma;
  if (gamma) {
    s.x_post = state.x_prior + state.K * (state.F_inv_T * eps_received);
    s.P_post = op_q_tilde(state.P_prior, 1.0, model);
  } else {
    s.x_post = state.x_prior;
    s.P_post = op_q_tilde(state.P_prior, specfun::kappa(beta), model);
  }
  return s;
}

/// Iterates P <- h(q(P)) from Xi0 (or Q when Xi0 = 0) until the max-norm step
/// is below tol.
inline SteadyState riccati_fixed_point(const SystemModel& model, double tol = 1e-12, int max_iter = 100000) {
  if (!(tol > 0.0)) throw DomainError("riccati_fixed_point: tol must be positive");
  Matrix P = max_abs(model.Xi0()) > 0.0 ? model.Xi0() : model.Q();
  for (int it = 1; it <= max_iter; ++it) {
    Matrix next = op_h(op_q_tilde(P, 1.0, model), model);
    if (!next.allFinite() || next.trace() > 1e12) {
      throw DivergenceError("riccati_fixed_point: iteration diverged (is (A, C) detectable?)");
    }
    const double diff = max_abs(next - P);
    P = std::move(next);
    if (diff < tol) {
      SteadyState ss;
      FilterState tmp;
      tmp.P_prior = P;
      detail::refresh_gains(tmp, model);
      ss.P = P;
      ss.K = tmp.K;
      ss.F = tmp.F;
      ss.F_inv_T = tmp.F_inv_T;
      ss.S = tmp.S;
      ss.iterations = it;
      return ss;
    }
  }
  throw DivergenceError("riccati_fixed_point: no convergence within " + std::to_string(max_iter) + " iterations");
}

inline Matrix SteadyState::P_post(const SystemModel& model) const { return op_q_tilde(P, 1.0, model); }

}  // namespace spfdi
