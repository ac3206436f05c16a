#pragma once

// Scenario configuration, closed-loop Monte Carlo and trace/summary output.
//
// One step of trajectory j at time k:
//   plant        y_k = C x_k + v_k,  x_{k+1} = A x_k + w_k
//   estimator    time update (k > 0), gains K_k, F_k from P^-_k
//   feedback     sensor receives C x^a-_k + alpha_k   (alpha = 0 unless two_channel)
//   sensor       z_k = y_k - received feedback,  eps_k = F_k^T z_k
//   forward      eps~_k = eps_k / mu + delta          (identity when attack is off)
//   scheduler    gamma_k from eps~_k; detector g_k = |eps~_k|^2
//   estimator    measurement update with eps~_k
// A shadow copy of the nominal estimator (same gamma, true innovations) runs
// alongside so the attack effect x^a - x^ and the cancellation can be measured.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "spfdi/analysis.hpp"
#include "spfdi/attack.hpp"
#include "spfdi/detector.hpp"
#include "spfdi/errors.hpp"
#include "spfdi/estimator.hpp"
#include "spfdi/model.hpp"
#include "spfdi/specfun.hpp"

namespace spfdi {

enum class AttackMode { off, forward_only, two_channel };

inline std::string to_string(AttackMode mode) {
  switch (mode) {
    case AttackMode::off: return "off";
    case AttackMode::forward_only: return "forward_only";
    case AttackMode::two_channel: return "two_channel";
  }
  return "off";
}

inline AttackMode parse_attack_mode(const std::string& s) {
  if (s == "off") return AttackMode::off;
  if (s == "forward_only") return AttackMode::forward_only;
  if (s == "two_channel") return AttackMode::two_channel;
  throw ConfigError(ConfigErrorCode::invalid_value, "attack_mode",
                    "attack_mode must be one of off, forward_only, two_channel (got '" + s + "')");
}

struct ScenarioConfig {
  SystemModel model;
  double beta = 0.0;
  double upsilon = 0.01;
  double M = 0.99;
  double sigma = 0.0;
  bool sigma_designed = false;  // sigma came from design_threshold
  int solver_dof = 1;
  long steps = 1;
  long trajectories = 1;
  long burn_in = 0;
  std::uint64_t seed = 0;
  AttackMode attack_mode = AttackMode::off;
  AttackParams attack_params = AttackParams::off(1);  // the forward-channel parameters for attacked modes
  bool attack_params_solved = false;
  specfun::IntegerOrderMode marcum_mode = specfun::IntegerOrderMode::exact_series;
  unsigned threads = 0;  // 0 = hardware concurrency

  SuccessCriteria criteria() const { return SuccessCriteria::make(M, upsilon); }
  DetectorConfig detector() const { return DetectorConfig{sigma, upsilon, solver_dof}; }

  /// Parameters the remote estimator actually sees applied.
  AttackParams effective_params() const {
    return attack_mode == AttackMode::off ? AttackParams::off(model.m()) : attack_params;
  }
};

namespace detail {

using Json = nlohmann::json;

inline const Json& require(const Json& j, const char* key) {
  if (!j.contains(key)) {
    throw ConfigError(ConfigErrorCode::missing_field, key, std::string("missing required field '") + key + "'");
  }
  return j.at(key);
}

inline double get_number(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_number()) throw ConfigError(ConfigErrorCode::invalid_value, key, std::string("'") + key + "' must be a number");
  return v.get<double>();
}

inline long get_integer(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_number_integer()) {
    throw ConfigError(ConfigErrorCode::invalid_value, key, std::string("'") + key + "' must be an integer");
  }
  return v.get<long>();
}

inline Matrix get_matrix(const Json& j, const char* key) {
  const Json& v = require(j, key);
  auto bad = [key] {
    return ConfigError(ConfigErrorCode::invalid_value, key,
                       std::string("'") + key + "' must be a row-major nested array of numbers");
  };
  if (!v.is_array() || v.empty() || !v[0].is_array() || v[0].empty()) throw bad();
  const auto rows = static_cast<Eigen::Index>(v.size());
  const auto cols = static_cast<Eigen::Index>(v[0].size());
  Matrix out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = v[r];
    if (!row.is_array()) throw bad();
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError(ConfigErrorCode::dimension_mismatch, key, std::string("'") + key + "' has ragged rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!row[c].is_number()) throw bad();
      out(r, c) = row[c].get<double>();
    }
  }
  return out;
}

inline SystemModel parse_model(const Json& j) {
  Matrix A = get_matrix(j, "A");
  Matrix C = get_matrix(j, "C");
  Matrix Q = get_matrix(j, "Q");
  Matrix R = get_matrix(j, "R");
  Matrix Xi0 = j.contains("Xi0") ? get_matrix(j, "Xi0") : Matrix::Identity(A.rows(), A.rows());
  try {
    return SystemModel(std::move(A), std::move(C), std::move(Q), std::move(R), std::move(Xi0));
  } catch (const ModelError& e) {
    const auto code = e.reason() == ModelError::Reason::dimension ? ConfigErrorCode::dimension_mismatch
                      : e.reason() == ModelError::Reason::definiteness ? ConfigErrorCode::not_psd
                                                                       : ConfigErrorCode::invalid_value;
    throw ConfigError(code, "model." + e.field(), std::string("model.") + e.what());
  }
}

}  // namespace detail

/// Builds and validates a scenario from its JSON document. sigma is designed
/// from upsilon/solver_dof when absent; attack parameters are solved when
/// absent and the attack is enabled.
inline ScenarioConfig parse_config(const nlohmann::json& j) {
  using detail::get_integer;
  using detail::get_number;
  if (!j.is_object()) throw ConfigError(ConfigErrorCode::parse, "", "configuration must be a JSON object");
  SystemModel model = detail::parse_model(detail::require(j, "model"));
  const auto m = model.m();

  ScenarioConfig cfg{std::move(model)};
  cfg.beta = get_number(j, "beta");
  cfg.upsilon = get_number(j, "upsilon");
  cfg.M = get_number(j, "M");
  cfg.solver_dof = j.contains("solver_dof") ? static_cast<int>(get_integer(j, "solver_dof")) : static_cast<int>(m);
  cfg.steps = get_integer(j, "steps");
  cfg.trajectories = get_integer(j, "trajectories");
  cfg.burn_in = j.contains("burn_in") ? get_integer(j, "burn_in") : 200;
  cfg.seed = j.contains("seed") ? static_cast<std::uint64_t>(get_integer(j, "seed")) : 0;
  cfg.attack_mode = j.contains("attack_mode") ? parse_attack_mode(j.at("attack_mode").get<std::string>())
                                              : AttackMode::off;
  if (j.contains("marcum_mode")) {
    const auto mode = j.at("marcum_mode").get<std::string>();
    if (mode == "exact") {
      cfg.marcum_mode = specfun::IntegerOrderMode::exact_series;
    } else if (mode == "average") {
      cfg.marcum_mode = specfun::IntegerOrderMode::average_neighbors;
    } else {
      throw ConfigError(ConfigErrorCode::invalid_value, "marcum_mode", "marcum_mode must be 'exact' or 'average'");
    }
  }
  if (j.contains("threads")) cfg.threads = static_cast<unsigned>(get_integer(j, "threads"));

  if (!(cfg.beta >= 0.0)) throw ConfigError(ConfigErrorCode::invalid_value, "beta", "beta must be nonnegative");
  if (cfg.solver_dof < 1) throw ConfigError(ConfigErrorCode::invalid_value, "solver_dof", "solver_dof must be >= 1");
  if (cfg.steps < 1) throw ConfigError(ConfigErrorCode::invalid_value, "steps", "steps must be positive");
  if (cfg.trajectories < 1) {
    throw ConfigError(ConfigErrorCode::invalid_value, "trajectories", "trajectories must be positive");
  }
  if (cfg.burn_in < 0 || cfg.burn_in >= cfg.steps) {
    throw ConfigError(ConfigErrorCode::invalid_value, "burn_in", "burn_in must satisfy 0 <= burn_in < steps");
  }
  const auto criteria = cfg.criteria();  // validates M and upsilon

  if (j.contains("sigma") && !j.at("sigma").is_null()) {
    cfg.sigma = get_number(j, "sigma");
    if (!(cfg.sigma > 0.0)) throw ConfigError(ConfigErrorCode::invalid_value, "sigma", "sigma must be positive");
    check_threshold_order(cfg.beta, cfg.sigma);
  } else {
    cfg.sigma = design_threshold(cfg.upsilon, cfg.solver_dof, cfg.beta).sigma;
    cfg.sigma_designed = true;
  }

  if (j.contains("attack_params") && !j.at("attack_params").is_null()) {
    const auto& ap = j.at("attack_params");
    const double mu = get_number(ap, "mu");
    const double delta_bar = get_number(ap, "delta_bar");
    if (!(mu >= 1.0)) throw ConfigError(ConfigErrorCode::invalid_value, "attack_params.mu", "mu must be >= 1");
    cfg.attack_params = AttackParams(mu, delta_bar, m);
  } else if (cfg.attack_mode != AttackMode::off) {
    SolverOptions opts;
    opts.mode = cfg.marcum_mode;
    cfg.attack_params = solve_optimal_params(cfg.beta, cfg.sigma, criteria, cfg.solver_dof, opts).params(m);
    cfg.attack_params_solved = true;
  } else {
    cfg.attack_params = AttackParams::off(m);
  }
  return cfg;
}

inline nlohmann::json read_config_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(ConfigErrorCode::parse, "", "cannot open configuration file '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(ConfigErrorCode::parse, "", "configuration '" + path + "' is not valid JSON: " + e.what());
  }
}

/// parse_config with JSON type errors reported as ConfigError.
inline ScenarioConfig checked_parse_config(const nlohmann::json& j) {
  try {
    return parse_config(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(ConfigErrorCode::invalid_value, "", std::string("configuration has a wrongly typed field: ") + e.what());
  }
}

inline ScenarioConfig load_config(const std::string& path) { return checked_parse_config(read_config_json(path)); }

struct TraceRecord {
  long k = 0;
  long traj = 0;
  bool gamma = false;
  bool alarm = false;
  double g = 0.0;
  Vector x, xhat, xhata, z, eps, epstilde;
};

struct SimulationSummary {
  double comm_rate = 0.0;
  double alarm_rate = 0.0;
  Vector emp_bias;
  double emp_cov_trace = 0.0;
  std::optional<Vector> theory_bias;
  std::optional<double> theory_cov_trace;
  double analytic_trigger = 0.0;
  double analytic_alarm = 0.0;
  long step_count = 0;  // post-burn-in steps per trajectory
  long trajectory_count = 0;

  // diagnostics
  long trigger_count = 0;
  long alarm_count = 0;
  double comm_rate_stderr = 0.0;
  double alarm_rate_stderr = 0.0;
  Vector emp_bias_stderr;          // from per-trajectory means
  double emp_cov_trace_stderr = 0.0;
  double mean_statistic = 0.0;     // mean of g over received eps~
  Vector sensor_eps_mean;          // sensor-side eps = F^T z
  Vector sensor_eps_var;
  double sensor_eps_lag1_autocorr = 0.0;  // first component
  double sensor_innovation_cov_trace = 0.0;
  double steady_innovation_trace = 0.0;   // trace(S)
  double max_cancellation_error = 0.0;    // max |z_sensor - z_nominal|_inf / |z_nominal|_inf
  double max_effect_path_error = 0.0;     // max |(x^a - x^) - x~|_inf
  bool theorem3_applicable = false;       // comm_rate >= 0.995
  bool diverged = false;
  std::string divergence_message;

  long total_steps() const { return step_count * trajectory_count; }
};

struct ScenarioResult {
  SimulationSummary summary;
  std::vector<TraceRecord> trace;  // all steps of all trajectories, trajectory-major
};

namespace detail {

struct TrajectoryStats {
  long steps = 0, triggers = 0, alarms = 0;
  Vector bias_sum, err_sum, eps_sum, eps_sq_sum;
  Matrix err_outer, z_outer;
  double g_sum = 0.0;
  double eps_lag_sum = 0.0;
  double max_cancel = 0.0, max_path = 0.0;
  bool diverged = false;
  std::string message;
  std::vector<TraceRecord> records;
};

inline TrajectoryStats run_trajectory(const ScenarioConfig& cfg, long traj, const Vector& centre, bool keep_trace) {
  const SystemModel& model = cfg.model;
  const auto n = model.n();
  const auto m = model.m();
  const AttackParams params = cfg.effective_params();
  const DetectorConfig det = cfg.detector();
  const bool attacked = cfg.attack_mode != AttackMode::off;
  const bool feedback = cfg.attack_mode == AttackMode::two_channel;

  TrajectoryStats st;
  st.bias_sum = Vector::Zero(n);
  st.err_sum = Vector::Zero(n);
  st.eps_sum = Vector::Zero(m);
  st.eps_sq_sum = Vector::Zero(m);
  st.err_outer = Matrix::Zero(n, n);
  st.z_outer = Matrix::Zero(m, m);

  try {
    RandomSource rng(cfg.seed, static_cast<std::uint64_t>(traj));
    PlantState plant = sample_initial_state(model, rng);
    FilterState remote = initial_filter_state(model);
    Vector shadow_prior = Vector::Zero(n);
    Vector shadow_post = Vector::Zero(n);
    AttackState effect = AttackState::zero(n, m);
    double prev_eps0 = 0.0;

    for (long k = 0; k < cfg.steps; ++k) {
      if (k > 0) {
        remote = time_update(remote, model);
        shadow_prior = model.A() * shadow_post;
        if (feedback) effect = attack_time_update(effect, model);
      }
      StepResult sr = step(model, plant, rng);
      const Vector& y = sr.measurement;

      Vector fed_back = model.C() * remote.x_prior;
      if (feedback) fed_back += feedback_attack(effect, model);
      const Vector z = y - fed_back;
      const Vector eps = transform_innovation(z, remote.F);
      const Vector eps_t = attacked ? forward_attack(eps, params) : eps;
      const bool gamma = schedule(eps_t, cfg.beta);
      const double g = statistic(eps_t);
      const bool alarm = test(g, det);

      remote = measurement_update(remote, eps_t, gamma, cfg.beta, model);
      const Vector z_nominal = innovation(y, shadow_prior, model);
      shadow_post = gamma ? Vector(shadow_prior + remote.K * z_nominal) : shadow_prior;
      if (feedback) effect = attack_measurement_update(effect, gamma, z, remote.K, remote.F_inv_T, params);

      if (!remote.x_post.allFinite() || !remote.P_post.allFinite()) {
        throw NumericError("estimator diverged at k = " + std::to_string(k));
      }

      if (feedback) {
        const double denom = std::max(z_nominal.cwiseAbs().maxCoeff(), 1e-12);
        st.max_cancel = std::max(st.max_cancel, (z - z_nominal).cwiseAbs().maxCoeff() / denom);
        const Vector direct = remote.x_post - shadow_post;
        st.max_path = std::max(st.max_path, (direct - effect.x_tilde_post).cwiseAbs().maxCoeff());
      }

      if (k >= cfg.burn_in) {
        ++st.steps;
        st.triggers += gamma ? 1 : 0;
        st.alarms += alarm ? 1 : 0;
        st.g_sum += g;
        st.bias_sum += remote.x_post - shadow_post;
        const Vector err = remote.x_post - plant.x - centre;
        st.err_sum += err;
        st.err_outer.noalias() += err * err.transpose();
        st.eps_sum += eps;
        st.eps_sq_sum += eps.cwiseProduct(eps);
        st.z_outer.noalias() += z * z.transpose();
        if (k > cfg.burn_in) st.eps_lag_sum += eps[0] * prev_eps0;
        prev_eps0 = eps[0];
      }
      if (keep_trace) {
        st.records.push_back(TraceRecord{k, traj, gamma, alarm, g, plant.x, shadow_post, remote.x_post, z, eps, eps_t});
      }
      plant = std::move(sr.next);
    }
  } catch (const Error& e) {
    st.diverged = true;
    st.message = "trajectory " + std::to_string(traj) + ": " + e.what();
  }
  return st;
}

}  // namespace detail

/// Runs every trajectory of the scenario and aggregates post-burn-in metrics.
/// Results depend only on the configuration: trajectory j always draws from
/// RandomSource(seed, j) and the reduction runs in trajectory order.
inline ScenarioResult run_scenario(const ScenarioConfig& cfg, bool keep_trace = false) {
  const SystemModel& model = cfg.model;
  const auto n = model.n();
  const auto m = model.m();
  const AttackParams params = cfg.effective_params();

  SimulationSummary sum;
  sum.trajectory_count = cfg.trajectories;
  sum.step_count = cfg.steps - cfg.burn_in;
  sum.analytic_trigger = trigger_probability(params, cfg.beta, m);
  sum.analytic_alarm = alarm_probability(params, cfg.sigma, static_cast<int>(m));

  std::optional<SteadyState> steady;
  try {
    steady = riccati_fixed_point(model);
    sum.steady_innovation_trace = steady->S.trace();
  } catch (const DivergenceError&) {
  }
  if (steady && model.is_stable()) {
    sum.theory_bias = steady_bias(params, *steady, model).value;
    sum.theory_cov_trace = attacked_fixed_point(params.mu(), *steady, model).trace();
  }
  const Vector centre = sum.theory_bias ? *sum.theory_bias : Vector::Zero(n);

  std::vector<detail::TrajectoryStats> stats(static_cast<std::size_t>(cfg.trajectories));
  unsigned workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<long>(workers, cfg.trajectories));
  std::atomic<long> next{0};
  auto work = [&] {
    for (long j = next++; j < cfg.trajectories; j = next++) {
      stats[static_cast<std::size_t>(j)] = detail::run_trajectory(cfg, j, centre, keep_trace);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  ScenarioResult result;
  long total = 0, used_traj = 0;
  Vector bias_sum = Vector::Zero(n), err_sum = Vector::Zero(n), eps_sum = Vector::Zero(m), eps_sq = Vector::Zero(m);
  Matrix err_outer = Matrix::Zero(n, n), z_outer = Matrix::Zero(m, m);
  Vector traj_mean_sum = Vector::Zero(n), traj_mean_sq = Vector::Zero(n);
  double tr_sum = 0.0, tr_sq = 0.0, g_sum = 0.0, lag_sum = 0.0;
  long lag_count = 0;
  for (auto& st : stats) {
    if (st.diverged && !sum.diverged) {
      sum.diverged = true;
      sum.divergence_message = st.message;
    }
    if (keep_trace) {
      for (auto& r : st.records) result.trace.push_back(std::move(r));
    }
    if (st.steps == 0) continue;
    total += st.steps;
    ++used_traj;
    sum.trigger_count += st.triggers;
    sum.alarm_count += st.alarms;
    bias_sum += st.bias_sum;
    err_sum += st.err_sum;
    err_outer += st.err_outer;
    eps_sum += st.eps_sum;
    eps_sq += st.eps_sq_sum;
    z_outer += st.z_outer;
    g_sum += st.g_sum;
    lag_sum += st.eps_lag_sum;
    lag_count += st.steps - 1;
    const Vector mean = st.bias_sum / static_cast<double>(st.steps);
    traj_mean_sum += mean;
    traj_mean_sq += mean.cwiseProduct(mean);
    const double tr = st.err_outer.trace() / static_cast<double>(st.steps);
    tr_sum += tr;
    tr_sq += tr * tr;
    sum.max_cancellation_error = std::max(sum.max_cancellation_error, st.max_cancel);
    sum.max_effect_path_error = std::max(sum.max_effect_path_error, st.max_path);
  }

  if (total > 0) {
    const double N = static_cast<double>(total);
    sum.comm_rate = sum.trigger_count / N;
    sum.alarm_rate = sum.alarm_count / N;
    sum.comm_rate_stderr = std::sqrt(sum.comm_rate * (1.0 - sum.comm_rate) / N);
    sum.alarm_rate_stderr = std::sqrt(sum.alarm_rate * (1.0 - sum.alarm_rate) / N);
    sum.emp_bias = bias_sum / N;
    sum.emp_cov_trace = err_outer.trace() / N;
    sum.mean_statistic = g_sum / N;
    sum.sensor_eps_mean = eps_sum / N;
    sum.sensor_eps_var = eps_sq / N - sum.sensor_eps_mean.cwiseProduct(sum.sensor_eps_mean);
    sum.sensor_innovation_cov_trace = z_outer.trace() / N;
    if (lag_count > 0) {
      const double v0 = sum.sensor_eps_var[0];
      const double mu0 = sum.sensor_eps_mean[0];
      sum.sensor_eps_lag1_autocorr = (lag_sum / lag_count - mu0 * mu0) / v0;
    }
    const double T = static_cast<double>(used_traj);
    if (used_traj > 1) {
      const Vector mean = traj_mean_sum / T;
      const Vector var = (traj_mean_sq / T - mean.cwiseProduct(mean)) * (T / (T - 1.0));
      sum.emp_bias_stderr = (var.cwiseMax(0.0) / T).cwiseSqrt();
      const double trm = tr_sum / T;
      sum.emp_cov_trace_stderr = std::sqrt(std::max(0.0, (tr_sq / T - trm * trm) * (T / (T - 1.0))) / T);
    } else {
      sum.emp_bias_stderr = Vector::Zero(n);
    }
  } else {
    sum.emp_bias = Vector::Zero(n);
    sum.emp_bias_stderr = Vector::Zero(n);
  }
  sum.theorem3_applicable = cfg.attack_mode != AttackMode::off && sum.comm_rate >= 0.995;
  result.summary = std::move(sum);
  return result;
}

/// The exact CSV header for a trace with state dimension n and channel dimension m.
inline std::string trace_header(Eigen::Index n, Eigen::Index m) {
  std::string h = "k,traj,gamma,alarm,g";
  auto cols = [&h](const char* prefix, Eigen::Index count) {
    for (Eigen::Index i = 1; i <= count; ++i) h += "," + std::string(prefix) + "_" + std::to_string(i);
  };
  cols("x", n);
  cols("xhat", n);
  cols("xhata", n);
  cols("z", m);
  cols("eps", m);
  cols("epstilde", m);
  return h;
}

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_trace(std::ostream& out, const std::vector<TraceRecord>& records, Eigen::Index n, Eigen::Index m) {
  out << trace_header(n, m) << '\n';
  for (const auto& r : records) {
    out << r.k << ',' << r.traj << ',' << (r.gamma ? 1 : 0) << ',' << (r.alarm ? 1 : 0) << ',' << format_number(r.g);
    for (const Vector* v : {&r.x, &r.xhat, &r.xhata, &r.z, &r.eps, &r.epstilde}) {
      for (Eigen::Index i = 0; i < v->size(); ++i) out << ',' << format_number((*v)[i]);
    }
    out << '\n';
  }
}

inline void write_trace(const std::vector<TraceRecord>& records, Eigen::Index n, Eigen::Index m,
                        const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open trace file '" + path + "' for writing");
  write_trace(out, records, n, m);
  if (!out) throw IoError("failed writing trace file '" + path + "'");
}

inline nlohmann::ordered_json vector_json(const Vector& v) {
  auto a = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline nlohmann::ordered_json to_json(const SimulationSummary& s) {
  nlohmann::ordered_json j;
  j["comm_rate"] = s.comm_rate;
  j["alarm_rate"] = s.alarm_rate;
  j["emp_bias"] = vector_json(s.emp_bias);
  j["emp_cov_trace"] = s.emp_cov_trace;
  j["theory_bias"] = s.theory_bias ? vector_json(*s.theory_bias) : nlohmann::ordered_json(nullptr);
  j["theory_cov_trace"] = s.theory_cov_trace ? nlohmann::ordered_json(*s.theory_cov_trace) : nlohmann::ordered_json(nullptr);
  j["analytic_trigger"] = s.analytic_trigger;
  j["analytic_alarm"] = s.analytic_alarm;
  j["step_count"] = s.step_count;
  j["trajectory_count"] = s.trajectory_count;
  j["trigger_count"] = s.trigger_count;
  j["alarm_count"] = s.alarm_count;
  j["comm_rate_stderr"] = s.comm_rate_stderr;
  j["alarm_rate_stderr"] = s.alarm_rate_stderr;
  j["emp_bias_stderr"] = vector_json(s.emp_bias_stderr);
  j["emp_cov_trace_stderr"] = s.emp_cov_trace_stderr;
  j["mean_statistic"] = s.mean_statistic;
  j["sensor_eps_mean"] = vector_json(s.sensor_eps_mean);
  j["sensor_eps_var"] = vector_json(s.sensor_eps_var);
  j["sensor_eps_lag1_autocorr"] = s.sensor_eps_lag1_autocorr;
  j["sensor_innovation_cov_trace"] = s.sensor_innovation_cov_trace;
  j["steady_innovation_trace"] = s.steady_innovation_trace;
  j["max_cancellation_error"] = s.max_cancellation_error;
  j["max_effect_path_error"] = s.max_effect_path_error;
  j["theorem3_applicable"] = s.theorem3_applicable;
  j["diverged"] = s.diverged;
  j["divergence_message"] = s.divergence_message;
  return j;
}

}  // namespace spfdi
