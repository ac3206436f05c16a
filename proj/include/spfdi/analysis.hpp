#pragma once

// Steady-state performance under attack, assuming the scheduler always fires:
//
//   bias:        E = (I - A)^{-1} K F^{-T} delta,   prior bias A E
//   covariance:  P^a_{k+1} = A P^a_k A^T + Q - (2/mu - 1/mu^2) P C^T S^{-1} C P
//   open loop:   P^o_{k+1} = A P^o_k A^T + Q          (the mu -> infinity limit)

#include <optional>
#include <string>
#include <vector>

#include "spfdi/attack.hpp"
#include "spfdi/estimator.hpp"
#include "spfdi/linalg.hpp"
#include "spfdi/model.hpp"

namespace spfdi {

struct BiasVector {
  Vector value;  // E = lim E[x^a_k - x_k]
  Vector prior;  // A E = lim E[x^a-_k - x^-_k]
};

inline BiasVector steady_bias(const AttackParams& params, const SteadyState& steady, const SystemModel& model) {
  if (!model.is_stable()) {
    throw UnsupportedError("steady_bias: A is not stable, the attack bias grows without bound");
  }
  const Eigen::Index n = model.n();
  const Vector rhs = steady.K * (steady.F_inv_T * params.delta());
  BiasVector b;
  b.value = (Matrix::Identity(n, n) - model.A()).partialPivLu().solve(rhs);
  b.prior = model.A() * b.value;
  return b;
}

/// P C^T S^{-1} C P at the steady state.
inline Matrix steady_correction(const SteadyState& steady, const SystemModel& model) {
  const Matrix CP = model.C() * steady.P;
  return symmetrize(CP.transpose() * steady.S.llt().solve(CP));
}

inline Matrix attacked_covariance_step(const Matrix& P_a, double mu, const SteadyState& steady,
                                       const SystemModel& model) {
  if (!(mu >= 1.0)) throw DomainError("attacked_covariance_step: mu must be >= 1");
  const double weight = 2.0 / mu - 1.0 / (mu * mu);
  return symmetrize(model.A() * P_a * model.A().transpose() + model.Q() - weight * steady_correction(steady, model));
}

inline Matrix open_loop_step(const Matrix& P_o, const SystemModel& model) { return op_h(P_o, model); }

struct FixedPoint {
  Matrix P;
  int iterations = 0;
  double trace() const { return P.trace(); }
};

namespace detail {

template <class Step>
FixedPoint iterate_to_fixed_point(Step&& step, Matrix P, double tol, int max_iter, const char* what) {
  for (int it = 1; it <= max_iter; ++it) {
    Matrix next = step(P);
    if (!next.allFinite() || std::abs(next.trace()) > 1e12) {
      throw DivergenceError(std::string(what) + ": covariance recursion diverged (trace beyond 1e12)");
    }
    const double diff = max_abs(next - P);
    P = std::move(next);
    if (diff < tol) return FixedPoint{std::move(P), it};
  }
  throw DivergenceError(std::string(what) + ": no convergence within " + std::to_string(max_iter) + " iterations");
}

}  // namespace detail

/// Fixed point of the attacked covariance recursion, iterated from zero.
inline FixedPoint attacked_fixed_point(double mu, const SteadyState& steady, const SystemModel& model,
                                       double tol = 1e-13, int max_iter = 1000000) {
  if (!(mu >= 1.0)) throw DomainError("attacked_fixed_point: mu must be >= 1");
  const Matrix W = steady_correction(steady, model);
  const double weight = 2.0 / mu - 1.0 / (mu * mu);
  auto step = [&](const Matrix& P) {
    return symmetrize(model.A() * P * model.A().transpose() + model.Q() - weight * W);
  };
  return detail::iterate_to_fixed_point(step, Matrix::Zero(model.n(), model.n()), tol, max_iter,
                                        "attacked_fixed_point");
}

/// Lyapunov fixed point X = A X A^T + Q; diverges for unstable A.
inline FixedPoint open_loop_fixed_point(const SystemModel& model, double tol = 1e-13, int max_iter = 1000000) {
  auto step = [&](const Matrix& P) { return open_loop_step(P, model); };
  return detail::iterate_to_fixed_point(step, Matrix::Zero(model.n(), model.n()), tol, max_iter,
                                        "open_loop_fixed_point");
}

enum class TrajectoryKind { nominal, attacked, open_loop };

struct CovarianceTrajectory {
  TrajectoryKind kind = TrajectoryKind::nominal;
  std::vector<std::pair<long, Matrix>> points;
};

/// Propagates a posterior covariance from P0 for `steps` iterations. `nominal`
/// is the attacked recursion at mu = 1 (the steady Kalman filter), `attacked`
/// uses the given mu and `open_loop` drops the measurement correction.
inline CovarianceTrajectory covariance_trajectory(TrajectoryKind kind, const Matrix& P0, long steps, double mu,
                                                  const SteadyState& steady, const SystemModel& model,
                                                  long k0 = 0) {
  CovarianceTrajectory t;
  t.kind = kind;
  Matrix P = P0;
  t.points.emplace_back(k0, P);
  for (long k = 1; k <= steps; ++k) {
    switch (kind) {
      case TrajectoryKind::nominal: P = attacked_covariance_step(P, 1.0, steady, model); break;
      case TrajectoryKind::attacked: P = attacked_covariance_step(P, mu, steady, model); break;
      case TrajectoryKind::open_loop: P = open_loop_step(P, model); break;
    }
    t.points.emplace_back(k0 + k, P);
  }
  return t;
}

struct SweepPoint {
  double mu = 1.0;
  std::optional<double> trace;
  Matrix P;
  std::string error;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  bool nondecreasing = true;   // traces along the ascending grid
  bool psd_ordered = true;     // P(mu_{i+1}) - P(mu_i) >= -tol in Loewner order
  bool dominates_nominal = true;  // every P(mu) >= P(mu = 1)
};

/// Fixed-point trace of the attacked recursion for each mu of an ascending grid.
inline SweepResult mu_sweep(const std::vector<double>& mu_grid, const SteadyState& steady, const SystemModel& model,
                            double psd_tol = 1e-9) {
  for (std::size_t i = 1; i < mu_grid.size(); ++i) {
    if (mu_grid[i] < mu_grid[i - 1]) throw DomainError("mu_sweep: grid must be sorted ascending");
  }
  SweepResult out;
  for (double mu : mu_grid) {
    SweepPoint p;
    p.mu = mu;
    try {
      auto fp = attacked_fixed_point(mu, steady, model);
      p.trace = fp.trace();
      p.P = std::move(fp.P);
    } catch (const Error& e) {
      p.error = e.what();
    }
    out.points.push_back(std::move(p));
  }
  const SweepPoint* prev = nullptr;
  for (const auto& p : out.points) {
    if (!p.trace) continue;
    if (prev) {
      if (*p.trace < *prev->trace - psd_tol) out.nondecreasing = false;
      if (!psd_dominates(p.P, prev->P, psd_tol)) out.psd_ordered = false;
    }
    prev = &p;
  }
  const Matrix base = attacked_fixed_point(1.0, steady, model).P;
  for (const auto& p : out.points) {
    if (p.trace && !psd_dominates(p.P, base, psd_tol)) out.dominates_nominal = false;
  }
  return out;
}

}  // namespace spfdi
