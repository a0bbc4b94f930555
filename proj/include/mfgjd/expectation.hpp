#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mfgjd/riccati.hpp"

namespace mfgjd {

enum class ExpectationMethod { Quadrature, SecondOrderODE, ClosedForm };

/// Expectation path E(t) of the controlled process, with a provenance tag for
/// which route produced it. dE is populated by routes that track the slope.
struct ExpectationPath {
  std::vector<double> t;
  std::vector<double> E;
  std::vector<double> dE;  // may be empty
  ExpectationMethod method = ExpectationMethod::Quadrature;

  double at(double time) const;
};

/// E(t) = exp(2 R(t,0)) x0 + int_0^t exp(2 R(t,eta)) (B(eta) + lambda M) deta,
/// with R(t,eta) = I(t) - I(eta), evaluated by composite quadrature on the
/// solution grid. The initial value propagates through the exp(2 R(t,0))
/// factor, which the characteristics of the transformed forward equation
/// require for the state-dependent drift 2A x + B; it reduces to the
/// deterministic flow when delta = lambda = 0.
///
/// When uncorrected_initial_term is set, the initial mean is added bare
/// (E = x0 + integral) instead; this variant exists for comparison tests only
/// and is wrong whenever x0 != 0 and A != 0.
ExpectationPath expectation_quadrature(const RiccatiSolution& sol, double lambda,
                                       double jump_mean, double x0,
                                       bool uncorrected_initial_term = false);

/// Second-order route, valid for constant a only: integrates
///   E'' + 2 a E = -b(t),  E(0) = x0,  E'(0) = B(0) + lambda M + 2 A(0) x0
/// forward on the solution grid. The derived initial slope turns the
/// boundary-value statement into an initial-value problem; the terminal value
/// then serves as a cross-check rather than a constraint. A(0) and B(0) must
/// be finite but the solution need not be complete, so analytic-continuation
/// grids from the closed-form solver are accepted.
ExpectationPath expectation_ivp(const CoefficientSchedule& sched, const RiccatiSolution& sol,
                                double lambda, double jump_mean, double x0);

/// Closed-form solution of E'' + b2 E' + (2a + b1) E = -b0 with the two-point
/// data E(0) = x0, E(T) = E_T, by characteristic roots (distinct real,
/// repeated, or complex pair). Throws ResonanceError when the two-point
/// problem is singular.
ExpectationPath corollary_closed_form(double a, double b0, double b1, double b2, double x0,
                                      double E_T, double T, std::size_t steps = 4096);

/// Terminal expectation for constant a != 0 and constant b, in closed form
/// (tan family for a > 0, tanh/coth for a < 0), including the x0 propagation
/// term. Agrees with expectation_quadrature at t = T on complete solutions and
/// continues analytically across interior blow-ups of A and B. Throws
/// SingularHorizonError when the a > 0 denominator cos(theta(0)) vanishes.
double terminal_expectation_const(double a, double b, double A_T, double B_T, double lambda,
                                  double jump_mean, double T, double x0);

enum class RegimeKind { Oscillatory, Relaxing, Polynomial };

struct Regime {
  RegimeKind kind;
  std::optional<double> equilibrium;  // -b / (2a) when a != 0
  std::optional<double> frequency;    // sqrt(2a) when a > 0
};

/// Long-run behaviour of E for constant a, b: oscillation about -b/(2a)
/// (a > 0), relaxation toward -b/(2a) (a < 0), or polynomial growth (a = 0).
Regime classify_regime(double a, double b);

}  // namespace mfgjd
