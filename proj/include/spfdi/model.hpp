#pragma once

// Discrete-time LTI plant x_{k+1} = A x_k + w_k, y_k = C x_k + v_k with
// w ~ N(0, Q), v ~ N(0, R), x_0 ~ N(0, Xi0), plus the seeded noise source.

#include <cstdint>
#include <random>
#include <string>
#include <utility>

#include "spfdi/linalg.hpp"

namespace spfdi {

/// Immutable plant description. Dimensions and definiteness are validated at
/// construction; detectability of (A, C) is not checked here.
class SystemModel {
 public:
  SystemModel(Matrix A, Matrix C, Matrix Q, Matrix R, Matrix Xi0)
      : A_(std::move(A)), C_(std::move(C)), Q_(std::move(Q)), R_(std::move(R)), Xi0_(std::move(Xi0)) {
    validate();
    Q_ = symmetrize(Q_);
    R_ = symmetrize(R_);
    Xi0_ = symmetrize(Xi0_);
    q_factor_ = psd_sqrt_factor(Q_, "Q");
    r_factor_ = psd_sqrt_factor(R_, "R");
    xi0_factor_ = psd_sqrt_factor(Xi0_, "Xi0");
  }

  const Matrix& A() const noexcept { return A_; }
  const Matrix& C() const noexcept { return C_; }
  const Matrix& Q() const noexcept { return Q_; }
  const Matrix& R() const noexcept { return R_; }
  const Matrix& Xi0() const noexcept { return Xi0_; }
  Eigen::Index n() const noexcept { return A_.rows(); }
  Eigen::Index m() const noexcept { return C_.rows(); }

  // G with G G^T equal to the covariance; used for sampling.
  const Matrix& q_factor() const noexcept { return q_factor_; }
  const Matrix& r_factor() const noexcept { return r_factor_; }
  const Matrix& xi0_factor() const noexcept { return xi0_factor_; }

  bool is_stable() const { return spectral_radius(A_) < 1.0; }

 private:
  void validate() const {
    using Why = ModelError::Reason;
    auto dim = [](const std::string& field, const std::string& msg) {
      return ModelError(Why::dimension, field, field + ": " + msg);
    };
    const auto n = A_.rows();
    if (n < 1 || A_.cols() != n) throw dim("A", "must be a nonempty square matrix");
    if (C_.rows() < 1 || C_.cols() != n) throw dim("C", "must be m x n with n = rows(A)");
    const auto m = C_.rows();
    if (Q_.rows() != n || Q_.cols() != n) throw dim("Q", "must be n x n");
    if (R_.rows() != m || R_.cols() != m) throw dim("R", "must be m x m with m = rows(C)");
    if (Xi0_.rows() != n || Xi0_.cols() != n) throw dim("Xi0", "must be n x n");

    const std::pair<const char*, const Matrix*> all[] = {{"A", &A_}, {"C", &C_}, {"Q", &Q_}, {"R", &R_}, {"Xi0", &Xi0_}};
    for (const auto& [name, mat] : all) {
      if (!all_finite(*mat)) throw ModelError(Why::non_finite, name, std::string(name) + ": non-finite entry");
    }
    auto psd = [](const Matrix& x, const char* name) {
      if (!is_symmetric(x, 1e-10)) {
        throw ModelError(Why::definiteness, name, std::string(name) + " must be symmetric");
      }
      if (min_eigenvalue(x) < -1e-10) {
        throw ModelError(Why::definiteness, name, std::string(name) + " must be positive semi-definite");
      }
    };
    psd(Q_, "Q");
    psd(Xi0_, "Xi0");
    if (!is_symmetric(R_, 1e-10)) throw ModelError(Why::definiteness, "R", "R must be symmetric");
    if (min_eigenvalue(R_) <= 1e-10) throw ModelError(Why::definiteness, "R", "R must be positive definite");
  }

  Matrix A_, C_, Q_, R_, Xi0_;
  Matrix q_factor_, r_factor_, xi0_factor_;
};

/// True plant state x_k at time index k.
struct PlantState {
  Vector x;
  std::uint64_t k = 0;
};

/// Deterministic Gaussian noise stream keyed by (seed, stream_id).
class RandomSource {
 public:
  RandomSource(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32),
                      0x5bd1e995u};
    engine_.seed(seq);
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  double standard_normal() { return normal_(engine_); }

  Vector standard_normal(Eigen::Index dim) {
    Vector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v[i] = normal_(engine_);
    return v;
  }

  /// Sample N(0, G G^T) given the factor G.
  Vector gaussian(const Matrix& factor) { return factor * standard_normal(factor.cols()); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline PlantState sample_initial_state(const SystemModel& model, RandomSource& rng) {
  return PlantState{rng.gaussian(model.xi0_factor()), 0};
}

struct StepResult {
  PlantState next;
  Vector measurement;  // y_k, taken from the state before the transition
};

/// y_k = C x_k + v_k, then x_{k+1} = A x_k + w_k. v is drawn before w.
inline StepResult step(const SystemModel& model, const PlantState& state, RandomSource& rng) {
  Vector y = model.C() * state.x + rng.gaussian(model.r_factor());
  Vector x_next = model.A() * state.x + rng.gaussian(model.q_factor());
  if (!x_next.allFinite() || !y.allFinite()) throw NumericError("plant step produced non-finite values");
  return StepResult{PlantState{std::move(x_next), state.k + 1}, std::move(y)};
}

}  // namespace spfdi
