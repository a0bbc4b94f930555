#include "mfgjd/investor.hpp"

#include <cmath>
#include <stdexcept>

namespace mfgjd {

namespace {

double arcoth(double x) { return 0.5 * std::log((x + 1.0) / (x - 1.0)); }

void require_valid_q(double q) {
  if (!(q < 1.0)) throw std::domain_error("risk exponent must satisfy q < 1");
}

}  // namespace

void InvestorScenario::validate() const {
  if (!(volatility > 0.0)) throw std::invalid_argument("investor: sigma must be > 0");
  require_valid_q(risk_exponent);
  if (beta < 0.0 || gamma < 0.0) throw std::invalid_argument("investor: beta, gamma must be >= 0");
  if (delta < 0.0 || lambda < 0.0)
    throw std::invalid_argument("investor: delta, lambda must be >= 0");
  if (!(horizon > 0.0)) throw std::invalid_argument("investor: horizon must be > 0");
  if (!(initial_sd > 0.0)) throw std::invalid_argument("investor: initial sd must be > 0");
}

double hara_risk_coefficient(double q, double sigma) {
  require_valid_q(q);
  if (!(sigma > 0.0)) throw std::domain_error("sigma must be > 0");
  const double qm1 = q - 1.0;
  return (1.0 - 2.0 * q) / (2.0 * sigma * sigma * qm1 * qm1);
}

double optimal_fraction(double mu, double r, double sigma, double q) {
  require_valid_q(q);
  if (!(sigma > 0.0)) throw std::domain_error("sigma must be > 0");
  return (mu - r) / (sigma * sigma * (1.0 - q));
}

double growth_rate(double mu, double r, double sigma, double q) {
  const double R = hara_risk_coefficient(q, sigma);
  return r + R * (mu - r) * (mu - r);
}

std::pair<CoefficientSchedule, TerminalData> to_mfg_problem(const InvestorScenario& s) {
  s.validate();
  const double R = hara_risk_coefficient(s.risk_exponent, s.volatility);
  const double r = s.interest_rate;
  const double a = s.beta * R - s.gamma;
  const double b = 2.0 * (s.gamma * s.reference_drift - s.beta * R * r);
  const double c = s.beta * r + s.beta * R * r * r - s.gamma * s.reference_drift * s.reference_drift;
  TerminalData term{R, -2.0 * R * r, r + R * r * r};
  return {CoefficientSchedule::constants(s.horizon, a, b, c), term};
}

double consensus_point(const InvestorScenario& s) {
  s.validate();
  const double R = hara_risk_coefficient(s.risk_exponent, s.volatility);
  const double denom = s.beta * R - s.gamma;
  if (denom == 0.0)
    throw std::domain_error("consensus point undefined: beta R == gamma (degenerate coupling)");
  return (s.interest_rate * s.beta * R - s.gamma * s.reference_drift) / denom;
}

Solvability solvability(const InvestorScenario& s, double T) {
  s.validate();
  const double R = hara_risk_coefficient(s.risk_exponent, s.volatility);
  const double a = s.beta * R - s.gamma;

  Solvability out;
  out.full_horizon = (a < 0.0) && (R < std::sqrt(0.5 * (s.gamma - s.beta * R)));
  if (out.full_horizon) return out;

  if (a > 0.0) {
    out.max_T = max_horizon(a, R);
  } else if (a < 0.0) {
    // Terminal level above the backward equilibrium sqrt(-a/2): the
    // coth-family solution blows up a fixed distance back from T.
    const double kappa = std::sqrt(-0.5 * a);
    if (R > kappa) out.max_T = arcoth(R / kappa) / std::sqrt(-2.0 * a);
    // R == kappa exactly: constant solution, no finite blow-up; max_T stays empty.
  } else {
    if (R > 0.0) out.max_T = 1.0 / (2.0 * R);
  }
  (void)T;
  return out;
}

OpinionDynamics opinion_dynamics(const InvestorScenario& s, std::size_t steps) {
  s.validate();
  const auto [sched, term] = to_mfg_problem(s);
  const double a = sched.a().constant_value();
  const double b = sched.b().constant_value();
  const double c = sched.c().constant_value();
  if (a == 0.0)
    throw std::domain_error("opinion_dynamics: beta R == gamma (degenerate coupling)");

  const double M = s.jump.mean();
  const double M2 = s.jump.second_moment();
  const auto sol = solve_closed_form_const(a, b, term, s.lambda, M, s.delta, c, s.horizon, steps,
                                           M2);

  ExpectationPath path;
  if (sol.complete()) {
    path = expectation_quadrature(sol, s.lambda, M, s.initial_mean);
  } else {
    // The expectation stays finite across interior coefficient blow-ups; the
    // closed-form second-order solution carries it through, anchored by the
    // analytic terminal value.
    const double E_T = terminal_expectation_const(a, b, term.A_T, term.B_T, s.lambda, M,
                                                  s.horizon, s.initial_mean);
    path = corollary_closed_form(a, b, 0.0, 0.0, s.initial_mean, E_T, s.horizon, steps);
  }

  OpinionDynamics out{std::move(path),
                      a < 0.0 ? OpinionRegime::Consensus : OpinionRegime::Disagreement,
                      consensus_point(s)};
  return out;
}

}  // namespace mfgjd
