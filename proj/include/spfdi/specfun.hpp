#pragma once

// Scalar special functions: Gaussian tail and its inverse, the scheduler
// constant kappa(beta), central/noncentral chi-square tails and the Marcum Q
// function of half-integer order.
//
// Everything here is a pure function of its arguments.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "spfdi/errors.hpp"

namespace spfdi::specfun {

namespace detail {

inline void require_finite(double x, const char* fn) {
  if (!std::isfinite(x)) throw DomainError(std::string(fn) + ": non-finite argument");
}

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// Rational initial guess for the standard normal quantile (lower tail),
// accurate to ~1e-9; refined by Halley steps in gaussian_q_inv.
inline double normal_quantile_guess(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) return -normal_quantile_guess(1.0 - p);
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// y^s e^{-y} / Gamma(s+1), evaluated in log space.
inline double gamma_increment(double s, double y) {
  if (y == 0.0) return 0.0;
  return std::exp(s * std::log(y) - y - std::lgamma(s + 1.0));
}

inline constexpr int kRecurrenceMaxTwiceS = 200;

// Regularized upper incomplete gamma Q(s, y) for s a positive multiple of 1/2,
// via Q(s+1, y) = Q(s, y) + y^s e^{-y} / Gamma(s+1) from Q(1, y) = e^{-y} or
// Q(1/2, y) = erfc(sqrt(y)). All increments are nonnegative.
inline double upper_gamma_half_integer(int twice_s, double y) {
  if (y <= 0.0) return 1.0;
  if (twice_s > kRecurrenceMaxTwiceS) return boost::math::gamma_q(0.5 * twice_s, y);
  double s = (twice_s % 2 == 0) ? 1.0 : 0.5;
  double acc = (twice_s % 2 == 0) ? std::exp(-y) : std::erfc(std::sqrt(y));
  const double target = 0.5 * twice_s;
  for (; s < target; s += 1.0) acc += gamma_increment(s, y);
  return acc > 1.0 ? 1.0 : acc;
}

}  // namespace detail

/// Upper tail of the standard normal distribution.
inline double gaussian_q(double x) {
  detail::require_finite(x, "gaussian_q");
  return 0.5 * std::erfc(x * detail::kInvSqrt2);
}

inline double gaussian_cdf(double x) { return gaussian_q(-x); }

inline double gaussian_pdf(double x) { return detail::kInvSqrt2Pi * std::exp(-0.5 * x * x); }

/// Inverse of gaussian_q on (0, 1).
inline double gaussian_q_inv(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("gaussian_q_inv: probability must lie in (0, 1)");
  if (p > 0.5) return -gaussian_q_inv(1.0 - p);
  double x = -detail::normal_quantile_guess(p);
  for (int it = 0; it < 50; ++it) {
    // Halley step on Phi(x) - (1 - p), written with the upper tail to keep precision.
    const double u = -(gaussian_q(x) - p) / gaussian_pdf(x);
    const double dx = u / (1.0 + 0.5 * x * u);
    x -= dx;
    if (std::abs(dx) <= 1e-15 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

/// kappa(beta) = sqrt(2/pi) beta e^{-beta^2/2} / [1 - 2Q(beta)].
/// Uses 1 - 2Q(beta) = erf(beta/sqrt 2) so small beta keeps full precision;
/// kappa(0) is the limit value 1.
inline double kappa(double beta) {
  detail::require_finite(beta, "kappa");
  if (beta < 0.0) throw DomainError("kappa: beta must be nonnegative");
  if (beta == 0.0) return 1.0;
  const double num = std::sqrt(2.0 / std::numbers::pi) * beta * std::exp(-0.5 * beta * beta);
  return num / std::erf(beta * detail::kInvSqrt2);
}

/// Pr(X >= x) for X central chi-square with dof degrees of freedom.
inline double chi2_survival(double x, int dof) {
  detail::require_finite(x, "chi2_survival");
  if (dof < 1) throw DomainError("chi2_survival: dof must be >= 1");
  if (x < 0.0) throw DomainError("chi2_survival: x must be nonnegative");
  return detail::upper_gamma_half_integer(dof, 0.5 * x);
}

/// sigma with chi2_survival(sigma, dof) = upper_tail.
inline double chi2_quantile(double upper_tail, int dof) {
  if (!(upper_tail > 0.0 && upper_tail < 1.0)) {
    throw DomainError("chi2_quantile: probability must lie in (0, 1)");
  }
  if (dof < 1) throw DomainError("chi2_quantile: dof must be >= 1");
  double lo = 0.0;
  double hi = std::max(1.0, static_cast<double>(dof));
  while (chi2_survival(hi, dof) > upper_tail) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 400 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_survival(mid, dof) > upper_tail) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Marcum Q order nu, restricted to positive multiples of 1/2.
class MarcumOrder {
 public:
  explicit MarcumOrder(double nu) {
    const double twice = 2.0 * nu;
    if (!(nu > 0.0) || !std::isfinite(nu) || twice != std::round(twice)) {
      throw DomainError("MarcumOrder: nu must be a positive multiple of 0.5");
    }
    twice_ = static_cast<int>(twice);
  }

  /// Order m/2 matching a chi-square variable with m degrees of freedom.
  static MarcumOrder from_dof(int dof) {
    if (dof < 1) throw DomainError("MarcumOrder: dof must be >= 1");
    return MarcumOrder(0.5 * dof);
  }

  double nu() const noexcept { return 0.5 * twice_; }
  int dof() const noexcept { return twice_; }
  bool is_odd_half() const noexcept { return twice_ % 2 == 1; }

 private:
  int twice_ = 1;
};

/// How integer orders are evaluated. `exact_series` is the default;
/// `average_neighbors` replaces Q_nu by [Q_{nu-1/2} + Q_{nu+1/2}] / 2.
enum class IntegerOrderMode { exact_series, average_neighbors };

namespace detail {

inline constexpr double kCentralThreshold = 1e-12;
inline constexpr double kSeriesTailBound = 1e-14;
inline constexpr long kSeriesMinTermCap = 100000;

// Poisson mixture of central chi-square tails:
//   Q_nu(a, b) = sum_j e^{-lambda} lambda^j / j! * Q(nu + j, b^2/2),  lambda = a^2/2.
// Summed outward from the Poisson mode so large lambda does not underflow.
inline double marcum_q_series(int twice_nu, double a, double b) {
  const double lambda = 0.5 * a * a;
  const double y = 0.5 * b * b;
  const double nu = 0.5 * twice_nu;
  if (lambda > 1e9) throw NumericError("marcum_q: noncentrality beyond the supported range");
  const long j0 = static_cast<long>(std::floor(lambda));

  const double w0 = std::exp(-lambda + j0 * std::log(lambda) - std::lgamma(j0 + 1.0));
  const double q0 = upper_gamma_half_integer(twice_nu + 2 * static_cast<int>(j0), y);
  double sum = w0 * q0;
  long terms = 1;
  const long cap = kSeriesMinTermCap + static_cast<long>(60.0 * std::sqrt(lambda));
  auto check = [&] {
    if (terms > cap) throw NumericError("marcum_q: series did not converge within " + std::to_string(cap) + " terms");
  };

  // forward: j = j0+1, j0+2, ...
  {
    double w = w0, q = q0;
    double s = nu + j0;
    double t = gamma_increment(s, y);
    for (long j = j0 + 1;; ++j) {
      w *= lambda / j;
      q = std::min(1.0, q + t);
      s += 1.0;
      t *= y / s;
      sum += w * q;
      ++terms;
      const double ratio = lambda / (j + 1.0);
      if (ratio < 1.0 && w / (1.0 - ratio) < kSeriesTailBound) break;
      check();
    }
  }
  // backward: j = j0-1, ..., 0
  {
    double w = w0, q = q0;
    double s = nu + j0;
    for (long j = j0 - 1; j >= 0; --j) {
      w *= (j + 1.0) / lambda;
      s -= 1.0;
      q = std::max(0.0, q - gamma_increment(s, y));
      sum += w * q;
      ++terms;
      const double ratio = j / lambda;
      if (ratio < 1.0 && w * ratio / (1.0 - ratio) < kSeriesTailBound) break;
      check();
    }
  }
  return std::clamp(sum, 0.0, 1.0);
}

// e^{-(a^2+b^2)/2} [(-1)^i e^{ab} - e^{-ab}] without cancellation for small ab.
inline double signed_exp_pair(int i, double a, double b) {
  const double ab = a * b;
  if (ab > 20.0) {
    const double em = std::exp(-0.5 * (b - a) * (b - a));
    const double ep = std::exp(-0.5 * (b + a) * (b + a));
    return (i % 2 == 0 ? em : -em) - ep;
  }
  const double base = std::exp(-0.5 * (a * a + b * b));
  return (i % 2 == 0 ? 2.0 * std::sinh(ab) : -2.0 * std::cosh(ab)) * base;
}

// Closed form for nu an odd multiple of 1/2, a > 0, b >= 0:
//   Q_nu(a,b) = erfc((b+a)/sqrt2)/2 + erfc((b-a)/sqrt2)/2
//     + 1/(a sqrt(2pi)) sum_{k=0}^{nu-3/2} b^{2k}/2^k sum_{q=0}^{k} (-1)^q (2q)!/((k-q)! q!)
//         * sum_{i=0}^{2q} [(-1)^i e^{-(b-a)^2/2} - e^{-(b+a)^2/2}] / ((ab)^{2q-i} i!)
inline double marcum_q_closed_form(int twice_nu, double a, double b) {
  double value = 0.5 * std::erfc((b + a) * kInvSqrt2) + 0.5 * std::erfc((b - a) * kInvSqrt2);
  const int k_max = (twice_nu - 3) / 2;  // nu - 1.5
  if (twice_nu < 3) return value;

  const double ab = a * b;
  double outer = 0.0;
  for (int k = 0; k <= k_max; ++k) {
    double middle = 0.0;
    for (int q = 0; q <= k; ++q) {
      const double coeff = std::exp(std::lgamma(2.0 * q + 1.0) - std::lgamma(k - q + 1.0) - std::lgamma(q + 1.0));
      double inner = 0.0;
      double inv_fact = 1.0;
      for (int i = 0; i <= 2 * q; ++i) {
        if (i > 0) inv_fact /= i;
        inner += signed_exp_pair(i, a, b) * inv_fact / std::pow(ab, 2 * q - i);
      }
      middle += (q % 2 == 0 ? coeff : -coeff) * inner;
    }
    outer += std::pow(b, 2 * k) / std::pow(2.0, k) * middle;
  }
  value += outer * kInvSqrt2Pi / a;
  return std::clamp(value, 0.0, 1.0);
}

// The alternating inner sums of the closed form lose precision for small a*b
// once nu >= 5/2, and everywhere for large nu (~1e-11 at nu = 5.5, ~1e-4 at
// nu = 10.5). Those cases use the Poisson series.
inline constexpr double kClosedFormMinAb = 1.0;
inline constexpr int kClosedFormMaxTwiceNu = 7;

inline double marcum_q_odd_half(int twice_nu, double a, double b) {
  if (twice_nu > kClosedFormMaxTwiceNu) return marcum_q_series(twice_nu, a, b);
  if (twice_nu >= 5 && a * b < kClosedFormMinAb) return marcum_q_series(twice_nu, a, b);
  return marcum_q_closed_form(twice_nu, a, b);
}

}  // namespace detail

/// Generalized Marcum Q: Pr(V >= b^2), V noncentral chi-square with 2*nu dof
/// and noncentrality a^2.
inline double marcum_q(MarcumOrder order, double a, double b,
                       IntegerOrderMode mode = IntegerOrderMode::exact_series) {
  detail::require_finite(a, "marcum_q");
  detail::require_finite(b, "marcum_q");
  if (a < 0.0 || b < 0.0) throw DomainError("marcum_q: a and b must be nonnegative");
  if (b == 0.0) return 1.0;
  if (a < detail::kCentralThreshold) return chi2_survival(b * b, order.dof());

  if (order.is_odd_half()) return detail::marcum_q_odd_half(order.dof(), a, b);
  if (mode == IntegerOrderMode::average_neighbors) {
    const double lower = detail::marcum_q_odd_half(order.dof() - 1, a, b);
    return 0.5 * (lower + detail::marcum_q_odd_half(order.dof() + 1, a, b));
  }
  return detail::marcum_q_series(order.dof(), a, b);
}

/// Pr(V >= x) for V noncentral chi-square(dof, noncentrality).
inline double noncentral_chi2_survival(double x, int dof, double noncentrality,
                                       IntegerOrderMode mode = IntegerOrderMode::exact_series) {
  detail::require_finite(x, "noncentral_chi2_survival");
  detail::require_finite(noncentrality, "noncentral_chi2_survival");
  if (x < 0.0 || noncentrality < 0.0) {
    throw DomainError("noncentral_chi2_survival: x and noncentrality must be nonnegative");
  }
  return marcum_q(MarcumOrder::from_dof(dof), std::sqrt(noncentrality), std::sqrt(x), mode);
}

}  // namespace spfdi::specfun
