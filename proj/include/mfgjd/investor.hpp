#pragma once

#include <optional>

#include "mfgjd/expectation.hpp"
#include "mfgjd/jump_models.hpp"
#include "mfgjd/riccati.hpp"

namespace mfgjd {

/// Market and penalty parameters for the opinion-formation application. The
/// state variable of the game is the opinion mu about the risky asset's
/// drift; portfolio wealth itself is never simulated, only the closed-form
/// optimal fraction and growth rate enter.
struct InvestorScenario {
  double interest_rate = 0.0;   // r
  double volatility = 0.2;      // sigma > 0
  double risk_exponent = 0.0;   // q < 1
  double beta = 0.0;            // growth-rate reward weight, >= 0
  double gamma = 0.0;           // reference-drift penalty weight, >= 0
  double reference_drift = 0.0; // mu_bar
  double delta = 0.0;           // opinion diffusion, >= 0
  double lambda = 0.0;          // opinion jump intensity, >= 0
  JumpDistribution jump = JumpDistribution::degenerate(0.0);
  double horizon = 1.0;         // T > 0
  double initial_mean = 0.0;    // mu_0, mean of the initial opinion density
  double initial_sd = 0.1;      // width of the default Gaussian opinion density

  void validate() const;
};

/// R = (1 - 2q) / (2 sigma^2 (q - 1)^2); sign matches sign of (1 - 2q).
double hara_risk_coefficient(double q, double sigma);

/// h* = (mu - r) / (sigma^2 (1 - q)), the optimal risky fraction.
double optimal_fraction(double mu, double r, double sigma, double q);

/// r + R (mu - r)^2, the capital growth rate under h*.
double growth_rate(double mu, double r, double sigma, double q);

/// Map the scenario to the constant-coefficient control problem:
///   a = beta R - gamma, b = 2 (gamma mu_bar - beta R r),
///   c = beta r + beta R r^2 - gamma mu_bar^2,
///   A_T = R, B_T = -2 R r, C_T = r + R r^2.
std::pair<CoefficientSchedule, TerminalData> to_mfg_problem(const InvestorScenario& s);

/// Long-run opinion equilibrium Q* = (r beta R - gamma mu_bar)/(beta R - gamma);
/// identical to -b/(2a) of the mapped problem. Throws when beta R == gamma.
double consensus_point(const InvestorScenario& s);

struct Solvability {
  bool full_horizon = false;          // both printed conditions hold
  std::optional<double> max_T;        // largest solvable horizon when they do not
};

/// Full-horizon solvability: beta R - gamma < 0 and R < sqrt((gamma - beta R)/2).
/// Otherwise max_T comes from the tan-family horizon (a > 0) or from the
/// coth-family backward blow-up (a < 0 with R above the equilibrium level).
Solvability solvability(const InvestorScenario& s, double T);

enum class OpinionRegime { Consensus, Disagreement };

struct OpinionDynamics {
  ExpectationPath path;
  OpinionRegime regime;
  std::optional<double> target;  // Q*
};

/// Full pipeline: map to the coefficient problem, solve the value
/// coefficients, and compute the expected-opinion path. Uses the quadrature
/// route when the coefficient solution is complete on [0, T]; otherwise the
/// path continues through interior coefficient blow-ups via the closed-form
/// second-order solution, which stays finite. steps controls the output grid.
OpinionDynamics opinion_dynamics(const InvestorScenario& s, std::size_t steps = 4096);

}  // namespace mfgjd
