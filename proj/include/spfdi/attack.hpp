#pragma once

// Two-channel scheduler-pointed false-data injection.
//
// Forward channel:  eps~ = eps / mu + delta, with delta = [delta_bar, 0, ..., 0].
// Feedback channel: alpha = -C x~^-, which cancels the forward attack's effect on
// the sensor-side innovation so it stays N(0, S).
//
// The optimal (mu, delta_bar) minimizes mu subject to
//   Q_{dof/2}(mu delta_bar, mu sqrt(sigma)) <= Upsilon   (detector stays quiet)
//   mu (delta_bar - beta) >= Psi                          (scheduler fires w.p. >= M)
// and both constraints are active at the optimum.

#include <cmath>
#include <sstream>
#include <string>

#include "spfdi/detector.hpp"
#include "spfdi/errors.hpp"
#include "spfdi/estimator.hpp"
#include "spfdi/linalg.hpp"
#include "spfdi/model.hpp"
#include "spfdi/specfun.hpp"

namespace spfdi {

/// Time-invariant attack parameters with the bias in the first component.
class AttackParams {
 public:
  AttackParams(double mu, double delta_bar, Eigen::Index m) : mu_(mu), delta_bar_(delta_bar) {
    if (!std::isfinite(mu) || mu < 1.0) throw DomainError("AttackParams: mu must be finite and >= 1");
    if (!std::isfinite(delta_bar)) throw DomainError("AttackParams: delta_bar must be finite");
    if (m < 1) throw DomainError("AttackParams: channel dimension must be >= 1");
    delta_ = Vector::Zero(m);
    delta_[0] = delta_bar;
  }

  /// mu = 1, delta = 0: the identity attack.
  static AttackParams off(Eigen::Index m) { return AttackParams(1.0, 0.0, m); }

  double mu() const noexcept { return mu_; }
  double delta_bar() const noexcept { return delta_bar_; }
  const Vector& delta() const noexcept { return delta_; }
  Eigen::Index m() const noexcept { return delta_.size(); }
  double phi() const { return delta_.norm(); }
  double psi() const { return delta_.cwiseAbs().maxCoeff(); }
  double xi() const { return mu_ * mu_ * phi() * phi(); }
  bool is_off() const noexcept { return mu_ == 1.0 && delta_bar_ == 0.0; }

 private:
  double mu_;
  double delta_bar_;
  Vector delta_;
};

/// Attack target M, false alarm rate Upsilon and the Gaussian level Psi with
/// Phi(Psi) = M.
struct SuccessCriteria {
  double M = 0.0;
  double upsilon = 0.0;
  double psi = 0.0;

  static SuccessCriteria make(double M, double upsilon) {
    if (!(M > 0.0 && M < 1.0)) throw ConfigError(ConfigErrorCode::invalid_value, "M", "attack target M must lie in (0, 1)");
    if (!(upsilon > 0.0 && upsilon < 1.0)) {
      throw ConfigError(ConfigErrorCode::invalid_value, "upsilon", "false alarm rate must lie in (0, 1)");
    }
    return SuccessCriteria{M, upsilon, specfun::gaussian_q_inv(1.0 - M)};
  }
};

/// Attacker's running copy of x^a - x (posterior and prior) and the feedback injection.
struct AttackState {
  Vector x_tilde_prior;
  Vector x_tilde_post;
  Vector alpha;

  static AttackState zero(Eigen::Index n, Eigen::Index m) {
    return AttackState{Vector::Zero(n), Vector::Zero(n), Vector::Zero(m)};
  }
};

inline Vector forward_attack(const Vector& eps, const AttackParams& params) {
  return eps / params.mu() + params.delta();
}

/// x~^-_k = A x~_{k-1}; alpha_k = -C x~^-_k.
inline AttackState attack_time_update(const AttackState& state, const SystemModel& model) {
  AttackState s;
  s.x_tilde_prior = model.A() * state.x_tilde_post;
  s.x_tilde_post = s.x_tilde_prior;
  s.alpha = -(model.C() * s.x_tilde_prior);
  return s;
}

/// x~_k = x~^-_k + (gamma/mu - gamma) K z + gamma K F^{-T} delta, with the
/// gains the remote estimator used at step k.
inline AttackState attack_measurement_update(const AttackState& prior, bool gamma, const Vector& z, const Matrix& K,
                                             const Matrix& F_inv_T, const AttackParams& params) {
  AttackState s = prior;
  if (gamma) s.x_tilde_post = prior.x_tilde_prior + (1.0 / params.mu() - 1.0) * (K * z) + K * (F_inv_T * params.delta());
  return s;
}

/// One full step of the attack-effect recursion with steady-state gains.
inline AttackState attack_effect_update(const AttackState& state, bool gamma, const Vector& z,
                                        const SteadyState& steady, const AttackParams& params,
                                        const SystemModel& model) {
  return attack_measurement_update(attack_time_update(state, model), gamma, z, steady.K, steady.F_inv_T, params);
}

inline Vector feedback_attack(const AttackState& state, const SystemModel& model) {
  return -(model.C() * state.x_tilde_prior);
}

/// Pr(||eps~||_inf > beta) for eps ~ N(0, I_m):
///   1 - prod_i [Phi(mu(beta - delta_i)) - Phi(-mu(beta + delta_i))].
inline double trigger_probability(const AttackParams& params, double beta, Eigen::Index m) {
  if (params.m() != m) throw DomainError("trigger_probability: delta has the wrong dimension");
  if (beta < 0.0) throw DomainError("trigger_probability: beta must be nonnegative");
  const double mu = params.mu();
  double quiet = 1.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double d = params.delta()[i];
    quiet *= specfun::gaussian_q(-mu * (beta + d)) - specfun::gaussian_q(mu * (beta - d));
  }
  return std::clamp(1.0 - quiet, 0.0, 1.0);
}

/// Pr(g~ >= sigma) = Q_{dof/2}(mu phi, mu sqrt(sigma)).
inline double alarm_probability(const AttackParams& params, double sigma, int dof,
                                specfun::IntegerOrderMode mode = specfun::IntegerOrderMode::exact_series) {
  const double mu2 = params.mu() * params.mu();
  return specfun::noncentral_chi2_survival(mu2 * sigma, dof, params.xi(), mode);
}

struct SolverOptions {
  specfun::IntegerOrderMode mode = specfun::IntegerOrderMode::exact_series;
  double mu_cap = 1e6;
  double mu_tol = 1e-12;
};

enum class SolveStatus {
  ok,
  delta_exceeds_sqrt_sigma,  // warning: optimum bias sits outside the sqrt(sigma) ball
  feasible_at_unit_mu,       // detector constraint already slack at mu = 1
};

struct OptimalAttack {
  double mu = 1.0;
  double delta_bar = 0.0;
  double psi = 0.0;
  double detector_residual = 0.0;  // Q_{dof/2}(mu delta_bar, mu sqrt sigma) - Upsilon
  double trigger_residual = 0.0;   // mu (delta_bar - beta) - Psi
  SolveStatus status = SolveStatus::ok;
  int evaluations = 0;

  AttackParams params(Eigen::Index m) const { return AttackParams(mu, delta_bar, m); }
};

/// Smallest mu >= 1 on the active trigger constraint delta_bar = beta + Psi/mu
/// with Q_{dof/2}(mu beta + Psi, mu sqrt(sigma)) = Upsilon. Brackets by doubling
/// mu from 1 and takes the first sign change, then bisects.
inline OptimalAttack solve_optimal_params(double beta, double sigma, const SuccessCriteria& criteria, int dof,
                                          const SolverOptions& options = {}) {
  if (!(beta >= 0.0) || !(sigma > 0.0)) throw DomainError("solve_optimal_params: need beta >= 0 and sigma > 0");
  check_threshold_order(beta, sigma);
  const auto order = specfun::MarcumOrder::from_dof(dof);
  const double root_sigma = std::sqrt(sigma);

  OptimalAttack out;
  out.psi = criteria.psi;
  auto g = [&](double mu) {
    ++out.evaluations;
    return specfun::marcum_q(order, std::abs(mu * beta + criteria.psi), mu * root_sigma, options.mode) -
           criteria.upsilon;
  };
  auto finish = [&](double mu) {
    out.mu = mu;
    out.delta_bar = beta + criteria.psi / mu;
    out.detector_residual = g(mu);
    out.trigger_residual = mu * (out.delta_bar - beta) - criteria.psi;
    if (out.status == SolveStatus::ok && out.delta_bar >= root_sigma) out.status = SolveStatus::delta_exceeds_sqrt_sigma;
    return out;
  };

  double lo = 1.0;
  if (g(lo) <= 0.0) {
    out.status = SolveStatus::feasible_at_unit_mu;
    return finish(lo);
  }
  double hi = 2.0;
  while (g(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > options.mu_cap) {
      std::ostringstream os;
      os << "solve_optimal_params: no feasible mu up to " << options.mu_cap << " (check beta, sigma, M, Upsilon)";
      throw InfeasibleError(os.str());
    }
  }
  while (hi - lo > options.mu_tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return finish(hi);
}

struct DeltaInterval {
  double low = 0.0;   // trigger boundary beta + Psi/mu
  double high = 0.0;  // detector boundary Q_{dof/2}(mu delta_bar, mu sqrt sigma) = Upsilon
};

/// Feasible delta_bar for a fixed mu >= mu*.
inline DeltaInterval feasible_delta_interval(double mu, double beta, double sigma, const SuccessCriteria& criteria,
                                             int dof, const SolverOptions& options = {}) {
  if (!(mu >= 1.0)) throw DomainError("feasible_delta_interval: mu must be >= 1");
  check_threshold_order(beta, sigma);
  const auto order = specfun::MarcumOrder::from_dof(dof);
  const double b = mu * std::sqrt(sigma);
  auto h = [&](double d) { return specfun::marcum_q(order, mu * d, b, options.mode) - criteria.upsilon; };

  DeltaInterval out;
  out.low = beta + criteria.psi / mu;
  auto empty = [&] {
    std::ostringstream os;
    os << "feasible_delta_interval: no feasible delta_bar at mu = " << mu << " (mu is below the optimum)";
    return ConfigError(ConfigErrorCode::empty_interval, "mu", os.str());
  };
  if (h(0.0) > 0.0) throw empty();

  double lo = 0.0;
  double hi = std::max(out.low, std::sqrt(sigma));
  while (h(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw NumericError("feasible_delta_interval: failed to bracket detector boundary");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (h(mid) <= 0.0 ? lo : hi) = mid;
  }
  out.high = lo;
  if (out.high < out.low) {
    if (out.low - out.high > 1e-9) throw empty();
    out.high = out.low;
  }
  return out;
}

}  // namespace spfdi
