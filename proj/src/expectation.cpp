#include "mfgjd/expectation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "mfgjd/detail/quadrature.hpp"
#include "mfgjd/errors.hpp"

namespace mfgjd {

namespace {

double arcoth(double x) { return 0.5 * std::log((x + 1.0) / (x - 1.0)); }

}  // namespace

double ExpectationPath::at(double time) const {
  if (t.empty()) throw std::logic_error("empty expectation path");
  if (!(time >= t.front() && time <= t.back()))
    throw std::domain_error("time outside the expectation path");
  const double h = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  const double pos = (time - t.front()) / h;
  const std::size_t i = std::min(static_cast<std::size_t>(pos), t.size() - 2);
  const double f = pos - static_cast<double>(i);
  return (1.0 - f) * E[i] + f * E[i + 1];
}

// ---------------------------------------------------------------------------
// Quadrature route

ExpectationPath expectation_quadrature(const RiccatiSolution& sol, double lambda,
                                       double jump_mean, double x0,
                                       bool uncorrected_initial_term) {
  if (!sol.complete())
    throw std::domain_error("expectation_quadrature requires a complete Riccati solution");

  const std::size_t n = sol.steps();
  const double h = sol.dt();
  const auto A = sol.A();
  const auto B = sol.B();
  const auto I = sol.I();
  const double lambdaM = lambda * jump_mean;

  ExpectationPath path;
  path.method = ExpectationMethod::Quadrature;
  path.t.assign(sol.times().begin(), sol.times().end());
  path.E.assign(n + 1, 0.0);
  path.dE.assign(n + 1, 0.0);

  // Factorized kernel exp(2(I_i - I_j)) = exp(2 I_i) * exp(-2 I_j) evaluated
  // pairwise when the exponents are large enough to threaten overflow.
  double maxAbsI = 0.0;
  for (double v : I) maxAbsI = std::max(maxAbsI, std::abs(v));
  const bool factorized = (2.0 * maxAbsI) < 600.0;

  if (factorized) {
    std::vector<double> g(n + 1);
    for (std::size_t j = 0; j <= n; ++j) g[j] = std::exp(-2.0 * I[j]) * (B[j] + lambdaM);
    const std::vector<double> G = detail::cumulative_integral(g, h);
    for (std::size_t i = 0; i <= n; ++i) {
      const double kernel0 = std::exp(2.0 * I[i]);
      path.E[i] = uncorrected_initial_term ? (x0 + kernel0 * G[i]) : kernel0 * (x0 + G[i]);
    }
  } else {
    for (std::size_t i = 0; i <= n; ++i) {
      auto f = [&](std::size_t j) { return std::exp(2.0 * (I[i] - I[j])) * (B[j] + lambdaM); };
      const double integral = detail::integrate_nodes(i + 1, h, f);
      const double kernel0 = std::exp(2.0 * (I[i] - I[0]));
      path.E[i] = uncorrected_initial_term ? (x0 + integral) : (kernel0 * x0 + integral);
    }
  }

  // E' = 2 A E + B + lambda M holds identically along the path.
  for (std::size_t i = 0; i <= n; ++i) path.dE[i] = 2.0 * A[i] * path.E[i] + B[i] + lambdaM;
  return path;
}

// ---------------------------------------------------------------------------
// Second-order initial-value route

ExpectationPath expectation_ivp(const CoefficientSchedule& sched, const RiccatiSolution& sol,
                                double lambda, double jump_mean, double x0) {
  if (!sched.a().is_constant())
    throw std::invalid_argument(
        "expectation_ivp: hypothesis requires constant a(t); use the quadrature route");
  const double a = sched.a().constant_value();
  const double A0 = sol.A()[0];
  const double B0 = sol.B()[0];
  if (!std::isfinite(A0) || !std::isfinite(B0))
    throw std::domain_error("expectation_ivp: A(0), B(0) unavailable (blown-up grid start)");

  const std::size_t n = sol.steps();
  const double h = sol.dt();
  const double lambdaM = lambda * jump_mean;

  ExpectationPath path;
  path.method = ExpectationMethod::SecondOrderODE;
  path.t.assign(sol.times().begin(), sol.times().end());
  path.E.assign(n + 1, 0.0);
  path.dE.assign(n + 1, 0.0);

  double E = x0;
  double V = B0 + lambdaM + 2.0 * A0 * x0;  // derived initial slope
  path.E[0] = E;
  path.dE[0] = V;
  auto accel = [&](double t, double e) { return -2.0 * a * e - sched.b().at(t); };
  for (std::size_t i = 0; i < n; ++i) {
    const double t = path.t[i];
    const double k1e = V, k1v = accel(t, E);
    const double k2e = V + 0.5 * h * k1v, k2v = accel(t + 0.5 * h, E + 0.5 * h * k1e);
    const double k3e = V + 0.5 * h * k2v, k3v = accel(t + 0.5 * h, E + 0.5 * h * k2e);
    const double k4e = V + h * k3v, k4v = accel(t + h, E + h * k3e);
    E += h / 6.0 * (k1e + 2.0 * k2e + 2.0 * k3e + k4e);
    V += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    path.E[i + 1] = E;
    path.dE[i + 1] = V;
  }
  return path;
}

// ---------------------------------------------------------------------------
// Closed form for the linear second-order equation

ExpectationPath corollary_closed_form(double a, double b0, double b1, double b2, double x0,
                                      double E_T, double T, std::size_t steps) {
  if (!(T > 0.0)) throw std::invalid_argument("corollary_closed_form: horizon must be positive");
  if (steps < 2) throw std::invalid_argument("corollary_closed_form: need at least 2 steps");

  const double stiffness = 2.0 * a + b1;
  const double disc = b2 * b2 - 4.0 * stiffness;

  // Particular solution E_p(t) and homogeneous basis (phi1, phi2) with their
  // derivatives.
  std::function<double(double)> Ep, dEp, phi1, dphi1, phi2, dphi2;
  if (stiffness != 0.0) {
    const double c = -b0 / stiffness;
    Ep = [c](double) { return c; };
    dEp = [](double) { return 0.0; };
  } else if (b2 != 0.0) {
    const double c = -b0 / b2;
    Ep = [c](double t) { return c * t; };
    dEp = [c](double) { return c; };
  } else {
    const double c = -0.5 * b0;
    Ep = [c](double t) { return c * t * t; };
    dEp = [c](double t) { return 2.0 * c * t; };
  }

  // Only the oscillatory family can make the two-point problem singular: its
  // sine mode vanishes at horizons that are multiples of the eigen-period.
  bool resonant = false;
  const double scale = std::max({1.0, b2 * b2, std::abs(stiffness)});
  if (std::abs(disc) <= 1e-12 * scale) {
    const double r = -0.5 * b2;
    phi1 = [r](double t) { return std::exp(r * t); };
    dphi1 = [r](double t) { return r * std::exp(r * t); };
    phi2 = [r](double t) { return t * std::exp(r * t); };
    dphi2 = [r](double t) { return (1.0 + r * t) * std::exp(r * t); };
  } else if (disc > 0.0) {
    const double r1 = 0.5 * (-b2 + std::sqrt(disc));
    const double r2 = 0.5 * (-b2 - std::sqrt(disc));
    phi1 = [r1](double t) { return std::exp(r1 * t); };
    dphi1 = [r1](double t) { return r1 * std::exp(r1 * t); };
    phi2 = [r2](double t) { return std::exp(r2 * t); };
    dphi2 = [r2](double t) { return r2 * std::exp(r2 * t); };
  } else {
    const double alpha = -0.5 * b2;
    const double omega = 0.5 * std::sqrt(-disc);
    phi1 = [=](double t) { return std::exp(alpha * t) * std::cos(omega * t); };
    dphi1 = [=](double t) {
      return std::exp(alpha * t) * (alpha * std::cos(omega * t) - omega * std::sin(omega * t));
    };
    phi2 = [=](double t) { return std::exp(alpha * t) * std::sin(omega * t); };
    dphi2 = [=](double t) {
      return std::exp(alpha * t) * (alpha * std::sin(omega * t) + omega * std::cos(omega * t));
    };
    resonant = std::abs(std::sin(omega * T)) < 1e-10;
  }
  if (resonant)
    throw ResonanceError("corollary_closed_form: two-point problem is singular "
                         "(eigen-period resonance at this horizon)");

  // Two-point system for the homogeneous weights.
  const double m00 = phi1(0.0), m01 = phi2(0.0);
  const double m10 = phi1(T), m11 = phi2(T);
  const double r0 = x0 - Ep(0.0);
  const double r1v = E_T - Ep(T);
  const double det = m00 * m11 - m01 * m10;
  const double c1 = (r0 * m11 - m01 * r1v) / det;
  const double c2 = (m00 * r1v - r0 * m10) / det;

  ExpectationPath path;
  path.method = ExpectationMethod::ClosedForm;
  const double h = T / static_cast<double>(steps);
  path.t.resize(steps + 1);
  path.E.resize(steps + 1);
  path.dE.resize(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    const double t = (i == steps) ? T : static_cast<double>(i) * h;
    path.t[i] = t;
    path.E[i] = Ep(t) + c1 * phi1(t) + c2 * phi2(t);
    path.dE[i] = dEp(t) + c1 * dphi1(t) + c2 * dphi2(t);
  }
  return path;
}

// ---------------------------------------------------------------------------
// Terminal expectation in closed form

double terminal_expectation_const(double a, double b, double A_T, double B_T, double lambda,
                                  double jump_mean, double T, double x0) {
  if (a == 0.0) throw std::domain_error("terminal_expectation_const requires a != 0");
  if (!(T > 0.0)) throw std::invalid_argument("terminal_expectation_const: T must be positive");
  const double lambdaM = lambda * jump_mean;

  if (a > 0.0) {
    const double s = std::sqrt(0.5 * a);
    const double w = std::sqrt(2.0 * a);
    const double theta_T = std::atan(A_T / s);
    const double theta_0 = theta_T + w * T;
    if (std::abs(std::cos(theta_0)) < 1e-10)
      throw SingularHorizonError(
          "terminal_expectation_const: horizon is resonant (cos theta(0) ~ 0)");
    const double cos_T = std::cos(theta_T), sin_T = std::sin(theta_T);
    const double cos_0 = std::cos(theta_0);
    const double K = cos_T * B_T - (b / w) * sin_T + lambdaM * cos_T;
    const double integral =
        K * (std::tan(theta_0) - std::tan(theta_T)) + (b / w) * (1.0 / cos_0 - 1.0 / cos_T);
    return x0 * cos_T / cos_0 + (cos_T / w) * integral;
  }

  const double kappa = std::sqrt(-0.5 * a);
  const double w = std::sqrt(-2.0 * a);
  const double x_T = A_T / kappa;

  if (std::abs(std::abs(x_T) - 1.0) < 1e-14) {
    // Constant A = A_T: direct integration of the exponential-kernel integral.
    const double A0 = A_T;
    const double g = (b + 2.0 * lambdaM * A0) / (2.0 * A0);
    const double e2 = std::exp(2.0 * A0 * T), e4 = std::exp(4.0 * A0 * T);
    return x0 * e2 + (lambdaM - g) * (e2 - 1.0) / (2.0 * A0) + (B_T + g) * (e4 - 1.0) / (4.0 * A0);
  }

  if (std::abs(x_T) < 1.0) {
    const double psi_T = std::atanh(x_T);
    const double psi_0 = psi_T - w * T;
    const double ch_T = std::cosh(psi_T), sh_T = std::sinh(psi_T);
    const double ch_0 = std::cosh(psi_0);
    const double K = ch_T * B_T + (b / w) * sh_T + lambdaM * ch_T;
    const double integral =
        K * (std::tanh(psi_T) - std::tanh(psi_0)) + (b / w) * (1.0 / ch_T - 1.0 / ch_0);
    return x0 * ch_T / ch_0 + (ch_T / w) * integral;
  }

  const double psi_T = arcoth(x_T);
  const double psi_0 = psi_T - w * T;
  if (std::abs(psi_0) < 1e-12 || std::abs(psi_T) < 1e-12)
    throw SingularHorizonError("terminal_expectation_const: coth-family argument vanishes");
  const double sh_T = std::sinh(psi_T), ch_T = std::cosh(psi_T);
  const double sh_0 = std::sinh(psi_0);
  const double K = sh_T * B_T + (b / w) * ch_T + lambdaM * sh_T;
  const double integral = K * (1.0 / std::tanh(psi_0) - 1.0 / std::tanh(psi_T)) +
                          (b / w) * (1.0 / sh_T - 1.0 / sh_0);
  return x0 * sh_T / sh_0 + (sh_T / w) * integral;
}

Regime classify_regime(double a, double b) {
  if (a > 0.0) return {RegimeKind::Oscillatory, -b / (2.0 * a), std::sqrt(2.0 * a)};
  if (a < 0.0) return {RegimeKind::Relaxing, -b / (2.0 * a), std::nullopt};
  return {RegimeKind::Polynomial, std::nullopt, std::nullopt};
}

}  // namespace mfgjd
