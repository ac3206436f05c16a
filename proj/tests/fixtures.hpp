#pragma once

#include <cstdint>
#include <string>

#include "spfdi/spfdi.hpp"

namespace fixture {

using spfdi::Matrix;
using spfdi::Vector;

inline Matrix paper_A() {
  Matrix A(3, 3);
  A << 0.5944, -0.1203, -0.4302, 0.0017, 0.7902, -0.0747, 0.0213, 0.8187, 0.1436;
  return A;
}

inline Matrix paper_C() {
  Matrix C(2, 3);
  C << 0.1365, 0.8939, 0.2987, 0.0118, 0.1991, 0.6614;
  return C;
}

inline spfdi::SystemModel paper_model() {
  return spfdi::SystemModel(paper_A(), paper_C(), 0.01 * Matrix::Identity(3, 3), 0.1 * Matrix::Identity(2, 2),
                            Matrix::Identity(3, 3));
}

inline spfdi::AttackParams paper_params() { return spfdi::AttackParams(2.7705, 2.4828, 2); }

inline std::string source_path(const std::string& rel) { return std::string(SPFDI_SOURCE_DIR) + "/" + rel; }

/// Paper scenario with a smaller Monte Carlo budget.
inline spfdi::ScenarioConfig paper_scenario(spfdi::AttackMode mode, long steps, long trajectories, long burn_in,
                                            std::uint64_t seed) {
  auto cfg = spfdi::load_config(source_path("scenarios/paper_sec5.json"));
  cfg.attack_mode = mode;
  cfg.steps = steps;
  cfg.trajectories = trajectories;
  cfg.burn_in = burn_in;
  cfg.seed = seed;
  return cfg;
}

// Small deterministic generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed, 0xfeed) {}
  double uniform(double lo, double hi) {
    const double u = 0.5 * std::erfc(-rng_.standard_normal() / std::sqrt(2.0));
    return lo + (hi - lo) * u;
  }
  Matrix psd(Eigen::Index n) {
    Matrix G(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) G(i, j) = rng_.standard_normal();
    return G * G.transpose();
  }
  Vector normal(Eigen::Index n) { return rng_.standard_normal(n); }

 private:
  spfdi::RandomSource rng_;
};

}  // namespace fixture
