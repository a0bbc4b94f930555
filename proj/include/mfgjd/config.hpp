#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mfgjd/investor.hpp"
#include "mfgjd/jump_models.hpp"
#include "mfgjd/riccati.hpp"

namespace mfgjd {

struct MonteCarloConfig {
  std::size_t paths = 100000;
  std::size_t steps = 2000;  // time steps over [0, T]
  std::uint64_t seed = 0;
  double truncation_cap = 1e6;
  std::size_t threads = 0;
};

struct DensityConfig {
  std::size_t n_omega = 1024;
  double omega_max = 32.0;
  double x_min = -12.0;
  double x_max = 12.0;
  std::size_t nx = 1024;
  std::size_t time_steps = 2000;
  double initial_sd = 0.0;  // 0: inherit problem.initial_sd (must then be > 0)
};

struct OutputConfig {
  std::string dir = "out";
  std::vector<double> checkpoints;  // expectation / Monte Carlo sample times
  std::vector<double> slices;       // density slice times
  bool write_charfn = false;
};

struct ValidateHook {
  std::string perturb_engine;  // empty: no perturbation
  double perturb_amount = 1e-3;
};

/// A fully validated scenario. Exactly one of raw coefficients or investor
/// parameters is present in the file; both paths resolve to a coefficient
/// schedule, terminal data and an initial mean.
struct ScenarioConfig {
  double T = 1.0;
  double delta = 0.0;
  double lambda = 0.0;
  JumpDistribution jump = JumpDistribution::degenerate(0.0);
  double x0 = 0.0;
  double initial_sd = 0.0;  // 0: point mass at x0; > 0: Gaussian initial law

  std::optional<CoefficientSchedule> schedule;  // always resolved
  TerminalData terminal;
  std::optional<InvestorScenario> investor;  // present for investor-style files

  std::size_t riccati_steps = 4096;
  std::optional<MonteCarloConfig> monte_carlo;
  std::optional<DensityConfig> density;
  OutputConfig output;
  ValidateHook validate_hook;

  const CoefficientSchedule& sched() const { return *schedule; }
};

/// Parse and validate a scenario file; throws ConfigError with the offending
/// field path in the message.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config_text(const std::string& json_text);

}  // namespace mfgjd
