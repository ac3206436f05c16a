#pragma once

#include <stdexcept>
#include <string>

namespace spfdi {

/// Broad failure classes. The CLI maps them onto exit codes:
/// validation-type errors exit 1, numeric-type errors exit 2.
enum class ErrorKind {
  domain,       // argument outside a function's domain
  model,        // invalid system model (dimensions, definiteness)
  config,       // invalid scenario / CLI configuration
  numeric,      // factorization failure, series non-convergence
  divergence,   // fixed-point iteration failed to converge
  infeasible,   // attack solver found no bracket
  unsupported,  // quantity undefined for the given model (e.g. unstable A)
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

  bool is_numeric() const noexcept {
    return kind_ == ErrorKind::numeric || kind_ == ErrorKind::divergence;
  }

 private:
  ErrorKind kind_;
};

struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error(ErrorKind::domain, w) {}
};

class ModelError : public Error {
 public:
  enum class Reason { dimension, definiteness, non_finite };

  ModelError(Reason reason, std::string field, const std::string& w)
      : Error(ErrorKind::model, w), reason_(reason), field_(std::move(field)) {}

  Reason reason() const noexcept { return reason_; }
  const std::string& field() const noexcept { return field_; }

 private:
  Reason reason_;
  std::string field_;
};

struct NumericError : Error {
  explicit NumericError(const std::string& w) : Error(ErrorKind::numeric, w) {}
};

struct DivergenceError : Error {
  explicit DivergenceError(const std::string& w) : Error(ErrorKind::divergence, w) {}
};

struct InfeasibleError : Error {
  explicit InfeasibleError(const std::string& w) : Error(ErrorKind::infeasible, w) {}
};

struct UnsupportedError : Error {
  explicit UnsupportedError(const std::string& w) : Error(ErrorKind::unsupported, w) {}
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorKind::io, w) {}
};

/// Distinct codes for scenario configuration failures.
enum class ConfigErrorCode {
  parse = 10,
  missing_field = 11,
  invalid_value = 12,
  dimension_mismatch = 13,
  not_psd = 14,
  threshold_order = 15,  // beta >= sqrt(sigma)
  empty_interval = 16,
};

class ConfigError : public Error {
 public:
  ConfigError(ConfigErrorCode code, std::string field, const std::string& what)
      : Error(ErrorKind::config, what), code_(code), field_(std::move(field)) {}

  ConfigErrorCode code() const noexcept { return code_; }
  const std::string& field() const noexcept { return field_; }

 private:
  ConfigErrorCode code_;
  std::string field_;
};

}  // namespace spfdi
