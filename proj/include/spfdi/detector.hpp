#pragma once

// Chi-square false-data detector: alarm when g = eps^T eps >= sigma.

#include <cmath>
#include <optional>
#include <sstream>

#include "spfdi/linalg.hpp"
#include "spfdi/specfun.hpp"

namespace spfdi {

struct DetectorConfig {
  double sigma = 0.0;    // detection threshold
  double upsilon = 0.0;  // false alarm rate the threshold was designed for
  int dof = 1;           // chi-square degrees of freedom used in the design
};

inline double statistic(const Vector& eps_received) { return eps_received.squaredNorm(); }

/// Boundary g == sigma raises the alarm.
inline bool test(double g, const DetectorConfig& config) { return g >= config.sigma; }

/// Throws ConfigError when beta >= sqrt(sigma): every trigger would then alarm.
inline void check_threshold_order(double beta, double sigma) {
  if (!(beta < std::sqrt(sigma))) {
    std::ostringstream os;
    os << "scheduler threshold must satisfy beta < sqrt(sigma); got beta = " << beta
       << ", sqrt(sigma) = " << std::sqrt(sigma);
    throw ConfigError(ConfigErrorCode::threshold_order, "beta", os.str());
  }
}

/// sigma = chi2_quantile(upsilon, dof). When a scheduler threshold is given it
/// is checked against the designed sigma.
inline DetectorConfig design_threshold(double upsilon, int dof, std::optional<double> beta = std::nullopt) {
  if (!(upsilon > 0.0 && upsilon < 1.0)) {
    throw ConfigError(ConfigErrorCode::invalid_value, "upsilon", "false alarm rate must lie in (0, 1)");
  }
  if (dof < 1) throw ConfigError(ConfigErrorCode::invalid_value, "dof", "detector dof must be >= 1");
  DetectorConfig cfg{specfun::chi2_quantile(upsilon, dof), upsilon, dof};
  if (beta) check_threshold_order(*beta, cfg.sigma);
  return cfg;
}

}  // namespace spfdi
