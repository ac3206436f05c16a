// spfdi command line: solve, simulate, analyze, sweep, reproduce-paper.
// JSON goes to stdout. Exit 0 on success, 1 on validation errors, 2 on numeric failures.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spfdi/spfdi.hpp"

namespace {

using spfdi::Matrix;
using spfdi::Vector;
using Json = nlohmann::ordered_json;

Json matrix_json(const Matrix& m) {
  auto a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(spfdi::vector_json(m.row(r).transpose()));
  return a;
}

spfdi::specfun::IntegerOrderMode parse_marcum_mode(const std::string& s) {
  if (s == "exact") return spfdi::specfun::IntegerOrderMode::exact_series;
  if (s == "average") return spfdi::specfun::IntegerOrderMode::average_neighbors;
  throw spfdi::ConfigError(spfdi::ConfigErrorCode::invalid_value, "marcum-mode", "--marcum-mode must be exact or average");
}

const char* status_name(spfdi::SolveStatus s) {
  switch (s) {
    case spfdi::SolveStatus::ok: return "ok";
    case spfdi::SolveStatus::delta_exceeds_sqrt_sigma: return "delta_exceeds_sqrt_sigma";
    case spfdi::SolveStatus::feasible_at_unit_mu: return "feasible_at_unit_mu";
  }
  return "ok";
}

void emit(const Json& j) { std::cout << j.dump(2) << std::endl; }

struct SolveArgs {
  double beta = 0.0;
  std::optional<double> sigma;
  double upsilon = 0.01;
  double M = 0.0;
  int dof = 0;
  std::optional<double> mu;
  std::string marcum_mode = "exact";
};

int run_solve(const SolveArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto criteria = spfdi::SuccessCriteria::make(a.M, a.upsilon);
  const double sigma = a.sigma ? *a.sigma : spfdi::design_threshold(a.upsilon, a.dof, a.beta).sigma;
  spfdi::SolverOptions opts;
  opts.mode = parse_marcum_mode(a.marcum_mode);
  const auto sol = spfdi::solve_optimal_params(a.beta, sigma, criteria, a.dof, opts);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  Json j;
  j["mu_star"] = sol.mu;
  j["delta_bar_star"] = sol.delta_bar;
  j["psi"] = sol.psi;
  j["sigma"] = sigma;
  j["dof"] = a.dof;
  j["detector_residual"] = sol.detector_residual;
  j["trigger_residual"] = sol.trigger_residual;
  j["status"] = status_name(sol.status);
  j["evaluations"] = sol.evaluations;
  if (a.mu) {
    const auto iv = spfdi::feasible_delta_interval(*a.mu, a.beta, sigma, criteria, a.dof, opts);
    j["feasible_interval"] = {{"mu", *a.mu}, {"low", iv.low}, {"high", iv.high}};
  }
  j["runtime_seconds"] = elapsed;
  emit(j);
  return 0;
}

struct SimulateArgs {
  std::string config;
  std::optional<std::string> attack;
  std::optional<long> seed, steps, trajectories, burn_in, threads;
  std::string trace, out;
};

nlohmann::json config_with_overrides(const SimulateArgs& a) {
  nlohmann::json j = spfdi::read_config_json(a.config);
  if (a.attack) j["attack_mode"] = *a.attack;
  if (a.seed) j["seed"] = *a.seed;
  if (a.steps) j["steps"] = *a.steps;
  if (a.trajectories) j["trajectories"] = *a.trajectories;
  if (a.burn_in) j["burn_in"] = *a.burn_in;
  if (a.threads) j["threads"] = *a.threads;
  return j;
}

Json scenario_json(const spfdi::ScenarioConfig& cfg) {
  Json s;
  s["attack_mode"] = spfdi::to_string(cfg.attack_mode);
  s["mu"] = cfg.effective_params().mu();
  s["delta_bar"] = cfg.effective_params().delta_bar();
  s["attack_params_solved"] = cfg.attack_params_solved;
  s["beta"] = cfg.beta;
  s["sigma"] = cfg.sigma;
  s["sigma_designed"] = cfg.sigma_designed;
  s["solver_dof"] = cfg.solver_dof;
  s["seed"] = cfg.seed;
  s["steps"] = cfg.steps;
  s["burn_in"] = cfg.burn_in;
  s["trajectories"] = cfg.trajectories;
  return s;
}

int run_simulate(const SimulateArgs& a) {
  const auto cfg = spfdi::checked_parse_config(config_with_overrides(a));
  const auto res = spfdi::run_scenario(cfg, !a.trace.empty());
  if (!a.trace.empty()) spfdi::write_trace(res.trace, cfg.model.n(), cfg.model.m(), a.trace);
  Json j = spfdi::to_json(res.summary);
  j["scenario"] = scenario_json(cfg);
  if (!a.out.empty()) {
    std::ofstream out(a.out);
    if (!out) throw spfdi::IoError("cannot open summary file '" + a.out + "'");
    out << j.dump(2) << '\n';
  }
  emit(j);
  return res.summary.diverged ? 2 : 0;
}

struct AnalyzeArgs {
  std::string config;
  std::optional<double> mu, delta_bar;
};

int run_analyze(const AnalyzeArgs& a) {
  const auto cfg = spfdi::load_config(a.config);
  const auto& model = cfg.model;
  const double mu = a.mu.value_or(cfg.attack_params.mu());
  const double delta_bar = a.delta_bar.value_or(cfg.attack_params.delta_bar());
  const spfdi::AttackParams params(mu, delta_bar, model.m());

  const auto steady = spfdi::riccati_fixed_point(model);
  Json j;
  j["mu"] = mu;
  j["delta_bar"] = delta_bar;
  j["spectral_radius"] = spfdi::spectral_radius(model.A());
  j["steady_prior_trace"] = steady.P.trace();
  j["kalman_posterior_trace"] = steady.P_post(model).trace();
  j["gain"] = matrix_json(steady.K);
  const auto bias = spfdi::steady_bias(params, steady, model);
  j["bias"] = spfdi::vector_json(bias.value);
  j["bias_prior"] = spfdi::vector_json(bias.prior);
  const auto fp = spfdi::attacked_fixed_point(mu, steady, model);
  j["attacked_fixed_point_trace"] = fp.trace();
  j["attacked_fixed_point"] = matrix_json(fp.P);
  const auto ol = spfdi::open_loop_fixed_point(model);
  j["open_loop_trace"] = ol.trace();
  j["open_loop_fixed_point"] = matrix_json(ol.P);
  j["analytic_trigger"] = spfdi::trigger_probability(params, cfg.beta, model.m());
  j["analytic_alarm"] = spfdi::alarm_probability(params, cfg.sigma, static_cast<int>(model.m()));
  emit(j);
  return 0;
}

std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> grid;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      grid.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw spfdi::ConfigError(spfdi::ConfigErrorCode::invalid_value, "grid", "--grid entry '" + item + "' is not a number");
    }
  }
  if (grid.empty()) throw spfdi::ConfigError(spfdi::ConfigErrorCode::invalid_value, "grid", "--grid is empty");
  return grid;
}

struct SweepArgs {
  std::string config;
  std::string grid = "1,1.5,2,2.7705,5,10,100,10000";
  std::string out;
};

int run_sweep(const SweepArgs& a) {
  const auto cfg = spfdi::load_config(a.config);
  const auto grid = parse_grid(a.grid);
  for (double mu : grid) {
    if (!(mu >= 1.0)) throw spfdi::ConfigError(spfdi::ConfigErrorCode::invalid_value, "grid", "mu values must be >= 1");
  }
  const auto steady = spfdi::riccati_fixed_point(cfg.model);
  const auto sweep = spfdi::mu_sweep(grid, steady, cfg.model);

  if (!a.out.empty()) {
    std::ofstream out(a.out);
    if (!out) throw spfdi::IoError("cannot open sweep file '" + a.out + "'");
    out << "mu,trace,error\n";
    for (const auto& p : sweep.points) {
      out << spfdi::format_number(p.mu) << ',' << (p.trace ? spfdi::format_number(*p.trace) : "") << ','
          << p.error << '\n';
    }
  }
  Json j;
  auto pts = Json::array();
  for (const auto& p : sweep.points) {
    Json e;
    e["mu"] = p.mu;
    e["trace"] = p.trace ? Json(*p.trace) : Json(nullptr);
    if (!p.error.empty()) e["error"] = p.error;
    pts.push_back(std::move(e));
  }
  j["points"] = std::move(pts);
  j["nondecreasing"] = sweep.nondecreasing;
  j["psd_ordered"] = sweep.psd_ordered;
  j["dominates_nominal"] = sweep.dominates_nominal;
  emit(j);
  return 0;
}

int run_reproduce(const std::string& config) {
  const auto cfg = spfdi::load_config(config);
  const auto rep = spfdi::reproduce_paper(cfg);
  std::fprintf(stderr, "%-38s %12s %14s %10s  %s\n", "check", "reference", "computed", "tolerance", "status");
  for (const auto& c : rep.checks) {
    std::fprintf(stderr, "%-38s %12.6g %14.8g %10.3g  %s%s%s\n", c.name.c_str(), c.reference, c.computed, c.tolerance,
                 c.status().c_str(), c.note.empty() ? "" : "  ", c.note.c_str());
  }
  emit(spfdi::to_json(rep));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scheduler-pointed false-data injection toolkit"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* sc = app.add_subcommand("solve", "optimal attack parameters and feasible delta_bar interval");
  sc->add_option("--beta", solve.beta, "scheduler threshold")->required();
  sc->add_option("--sigma", solve.sigma, "detector threshold (designed from --upsilon when omitted)");
  sc->add_option("--upsilon", solve.upsilon, "false alarm rate")->capture_default_str();
  sc->add_option("--target-M", solve.M, "attack target trigger probability")->required();
  sc->add_option("--dof", solve.dof, "chi-square degrees of freedom")->required();
  sc->add_option("--mu", solve.mu, "report the feasible delta_bar interval at this mu");
  sc->add_option("--marcum-mode", solve.marcum_mode, "exact or average")->capture_default_str();

  SimulateArgs sim;
  auto* ss = app.add_subcommand("simulate", "closed-loop Monte Carlo");
  ss->add_option("--config", sim.config, "scenario JSON")->required();
  ss->add_option("--attack", sim.attack, "off, forward_only or two_channel");
  ss->add_option("--seed", sim.seed);
  ss->add_option("--steps", sim.steps);
  ss->add_option("--trajectories", sim.trajectories);
  ss->add_option("--burn-in", sim.burn_in);
  ss->add_option("--threads", sim.threads);
  ss->add_option("--trace", sim.trace, "write the per-step trace CSV here");
  ss->add_option("--out", sim.out, "also write the summary JSON here");

  AnalyzeArgs an;
  auto* sa = app.add_subcommand("analyze", "steady bias and covariance fixed points");
  sa->add_option("--config", an.config, "scenario JSON")->required();
  sa->add_option("--mu", an.mu);
  sa->add_option("--delta-bar", an.delta_bar);

  SweepArgs sw;
  auto* sp = app.add_subcommand("sweep", "attacked fixed-point trace over a mu grid");
  sp->add_option("--config", sw.config, "scenario JSON")->required();
  sp->add_option("--grid", sw.grid, "comma separated ascending mu values")->capture_default_str();
  sp->add_option("--out", sw.out, "CSV output path");

  std::string repro_config = "scenarios/paper_sec5.json";
  auto* sr = app.add_subcommand("reproduce-paper", "run the published example and compare");
  sr->add_option("--config", repro_config)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*sc) return run_solve(solve);
    if (*ss) return run_simulate(sim);
    if (*sa) return run_analyze(an);
    if (*sp) return run_sweep(sw);
    if (*sr) return run_reproduce(repro_config);
  } catch (const spfdi::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.is_numeric() ? 2 : 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
