#include "mfgjd/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mfgjd/errors.hpp"

namespace mfgjd {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw ConfigError(path + ": " + why);
}

const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) fail(path + "." + key, "required field is missing");
  return j.at(key);
}

double require_number(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number()) fail(path + "." + key, "must be a number");
  return v.get<double>();
}

double number_or(const json& j, const std::string& key, const std::string& path, double dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_number()) fail(path + "." + key, "must be a number");
  return j.at(key).get<double>();
}

std::size_t size_or(const json& j, const std::string& key, const std::string& path,
                    std::size_t dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_number_unsigned()) fail(path + "." + key, "must be a nonnegative integer");
  return j.at(key).get<std::size_t>();
}

std::vector<double> number_array(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "must be an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number()) fail(path, "must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

JumpDistribution parse_jump(const json& j, const std::string& path) {
  const json& kind_v = require(j, "kind", path);
  if (!kind_v.is_string()) fail(path + ".kind", "must be a string");
  const std::string kind = kind_v.get<std::string>();
  try {
    if (kind == "degenerate") return JumpDistribution::degenerate(require_number(j, "size", path));
    if (kind == "exp_positive")
      return JumpDistribution::one_sided_exponential(require_number(j, "rate", path));
    if (kind == "symmetrized_exp")
      return JumpDistribution::symmetrized(
          JumpDistribution::one_sided_exponential(require_number(j, "rate", path)));
    if (kind == "tabulated")
      return JumpDistribution::tabulated(number_array(require(j, "z", path), path + ".z"),
                                         number_array(require(j, "p", path), path + ".p"));
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
  fail(path + ".kind", "unknown jump kind '" + kind +
                           "' (expected degenerate | exp_positive | symmetrized_exp | tabulated)");
}

Coefficient parse_coefficient(const json& v, const std::string& path) {
  if (v.is_number()) return Coefficient(v.get<double>());
  if (v.is_object()) {
    auto t = number_array(require(v, "t", path), path + ".t");
    auto values = number_array(require(v, "v", path), path + ".v");
    try {
      return Coefficient::sampled(std::move(t), std::move(values));
    } catch (const std::invalid_argument& e) {
      fail(path, e.what());
    }
  }
  fail(path, "must be a number or an object {t: [...], v: [...]}");
}

InvestorScenario parse_investor(const json& j, const std::string& path, double T, double delta,
                                double lambda, const JumpDistribution& jump, double x0,
                                double initial_sd) {
  InvestorScenario s;
  s.interest_rate = require_number(j, "r", path);
  s.volatility = require_number(j, "sigma", path);
  s.risk_exponent = require_number(j, "q", path);
  s.beta = require_number(j, "beta", path);
  s.gamma = require_number(j, "gamma", path);
  s.reference_drift = require_number(j, "mu_bar", path);
  s.delta = delta;
  s.lambda = lambda;
  s.jump = jump;
  s.horizon = T;
  s.initial_mean = x0;
  s.initial_sd = initial_sd > 0.0 ? initial_sd : 0.1;
  try {
    s.validate();
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
  return s;
}

}  // namespace

ScenarioConfig parse_config_text(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON (") + e.what() + ")");
  }

  ScenarioConfig cfg;
  const json& problem = require(j, "problem", "config");

  cfg.T = require_number(problem, "T", "problem");
  if (!(cfg.T > 0.0)) fail("problem.T", "must be > 0");
  cfg.delta = number_or(problem, "delta", "problem", 0.0);
  if (cfg.delta < 0.0) fail("problem.delta", "must be >= 0");
  cfg.lambda = number_or(problem, "lambda", "problem", 0.0);
  if (cfg.lambda < 0.0) fail("problem.lambda", "must be >= 0");
  if (problem.contains("jump")) cfg.jump = parse_jump(problem.at("jump"), "problem.jump");
  cfg.x0 = number_or(problem, "x0", "problem", 0.0);
  cfg.initial_sd = number_or(problem, "initial_sd", "problem", 0.0);
  if (cfg.initial_sd < 0.0) fail("problem.initial_sd", "must be >= 0");

  const bool has_raw = problem.contains("coefficients") || problem.contains("terminal");
  const bool has_investor = problem.contains("investor");
  if (has_raw == has_investor)
    fail("problem", "exactly one of {coefficients+terminal, investor} must be present");

  if (has_raw) {
    const json& coeffs = require(problem, "coefficients", "problem");
    Coefficient a = parse_coefficient(require(coeffs, "a", "problem.coefficients"),
                                      "problem.coefficients.a");
    Coefficient b = parse_coefficient(require(coeffs, "b", "problem.coefficients"),
                                      "problem.coefficients.b");
    Coefficient c = parse_coefficient(require(coeffs, "c", "problem.coefficients"),
                                      "problem.coefficients.c");
    const json& term = require(problem, "terminal", "problem");
    cfg.terminal.A_T = require_number(term, "A_T", "problem.terminal");
    cfg.terminal.B_T = require_number(term, "B_T", "problem.terminal");
    cfg.terminal.C_T = require_number(term, "C_T", "problem.terminal");
    cfg.schedule = CoefficientSchedule(cfg.T, std::move(a), std::move(b), std::move(c));
  } else {
    cfg.investor = parse_investor(problem.at("investor"), "problem.investor", cfg.T, cfg.delta,
                                  cfg.lambda, cfg.jump, cfg.x0, cfg.initial_sd);
    auto [sched, term] = to_mfg_problem(*cfg.investor);
    cfg.schedule = std::move(sched);
    cfg.terminal = term;
  }

  if (j.contains("numerics")) {
    const json& num = j.at("numerics");
    cfg.riccati_steps = size_or(num, "riccati_steps", "numerics", 4096);
    if (cfg.riccati_steps < 16) fail("numerics.riccati_steps", "must be >= 16");
    if (num.contains("monte_carlo")) {
      const json& mc = num.at("monte_carlo");
      MonteCarloConfig m;
      m.paths = size_or(mc, "paths", "numerics.monte_carlo", m.paths);
      if (m.paths < 100) fail("numerics.monte_carlo.paths", "must be >= 100");
      m.steps = size_or(mc, "steps", "numerics.monte_carlo", m.steps);
      if (m.steps < 100) fail("numerics.monte_carlo.steps", "must be >= 100 (dt <= T/100)");
      if (mc.contains("seed")) {
        if (!mc.at("seed").is_number_unsigned())
          fail("numerics.monte_carlo.seed", "must be a nonnegative integer");
        m.seed = mc.at("seed").get<std::uint64_t>();
      }
      m.truncation_cap = number_or(mc, "cap", "numerics.monte_carlo", m.truncation_cap);
      if (!(m.truncation_cap > 0.0)) fail("numerics.monte_carlo.cap", "must be > 0");
      m.threads = size_or(mc, "threads", "numerics.monte_carlo", 0);
      cfg.monte_carlo = m;
    }
    if (num.contains("density")) {
      const json& d = num.at("density");
      DensityConfig dc;
      dc.n_omega = size_or(d, "n_omega", "numerics.density", dc.n_omega);
      if (dc.n_omega < 8 || (dc.n_omega & (dc.n_omega - 1)) != 0)
        fail("numerics.density.n_omega", "must be a power of two >= 8");
      dc.omega_max = number_or(d, "omega_max", "numerics.density", dc.omega_max);
      if (!(dc.omega_max > 0.0)) fail("numerics.density.omega_max", "must be > 0");
      dc.x_min = number_or(d, "x_min", "numerics.density", dc.x_min);
      dc.x_max = number_or(d, "x_max", "numerics.density", dc.x_max);
      if (!(dc.x_max > dc.x_min)) fail("numerics.density.x_max", "must exceed x_min");
      dc.nx = size_or(d, "nx", "numerics.density", dc.nx);
      if (dc.nx < 8) fail("numerics.density.nx", "must be >= 8");
      dc.time_steps = size_or(d, "time_steps", "numerics.density", dc.time_steps);
      if (dc.time_steps < 1) fail("numerics.density.time_steps", "must be >= 1");
      dc.initial_sd = number_or(d, "initial_sd", "numerics.density", 0.0);
      if (dc.initial_sd < 0.0) fail("numerics.density.initial_sd", "must be >= 0");
      cfg.density = dc;
    }
  }

  if (j.contains("output")) {
    const json& out = j.at("output");
    if (out.contains("dir")) {
      if (!out.at("dir").is_string()) fail("output.dir", "must be a string");
      cfg.output.dir = out.at("dir").get<std::string>();
    }
    if (out.contains("checkpoints"))
      cfg.output.checkpoints = number_array(out.at("checkpoints"), "output.checkpoints");
    if (out.contains("slices"))
      cfg.output.slices = number_array(out.at("slices"), "output.slices");
    if (out.contains("write_charfn")) {
      if (!out.at("write_charfn").is_boolean()) fail("output.write_charfn", "must be a boolean");
      cfg.output.write_charfn = out.at("write_charfn").get<bool>();
    }
  }
  for (double t : cfg.output.checkpoints)
    if (!(t >= 0.0 && t <= cfg.T)) fail("output.checkpoints", "times must lie in [0, T]");
  for (double t : cfg.output.slices)
    if (!(t >= 0.0 && t <= cfg.T)) fail("output.slices", "times must lie in [0, T]");

  if (j.contains("validate")) {
    const json& v = j.at("validate");
    if (v.contains("perturb_engine")) {
      if (!v.at("perturb_engine").is_string())
        fail("validate.perturb_engine", "must be a string");
      cfg.validate_hook.perturb_engine = v.at("perturb_engine").get<std::string>();
    }
    cfg.validate_hook.perturb_amount =
        number_or(v, "perturb_amount", "validate", cfg.validate_hook.perturb_amount);
  }

  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace mfgjd
