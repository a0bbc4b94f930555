#include "mfgjd/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

#include "mfgjd/detail/quadrature.hpp"

namespace mfgjd {

namespace {

constexpr double kBlowUpCap = 1e8;

bool finite3(double x, double y, double z) {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
}

double arcoth(double x) { return 0.5 * std::log((x + 1.0) / (x - 1.0)); }

}  // namespace

// ---------------------------------------------------------------------------
// Coefficient / CoefficientSchedule

Coefficient Coefficient::sampled(std::vector<double> t, std::vector<double> v) {
  if (t.size() < 2 || t.size() != v.size())
    throw std::invalid_argument("sampled coefficient: need matching t/v arrays of length >= 2");
  for (std::size_t i = 0; i + 1 < t.size(); ++i)
    if (!(t[i] < t[i + 1]))
      throw std::invalid_argument("sampled coefficient: time grid must be strictly increasing");
  Coefficient c;
  c.value_ = Samples{std::move(t), std::move(v)};
  return c;
}

double Coefficient::at(double t) const {
  if (const double* c = std::get_if<double>(&value_)) return *c;
  const auto& s = std::get<Samples>(value_);
  if (t <= s.t.front()) return s.v.front();
  if (t >= s.t.back()) return s.v.back();
  const auto it = std::upper_bound(s.t.begin(), s.t.end(), t);
  const std::size_t i = static_cast<std::size_t>(std::distance(s.t.begin(), it)) - 1;
  const double f = (t - s.t[i]) / (s.t[i + 1] - s.t[i]);
  return (1.0 - f) * s.v[i] + f * s.v[i + 1];
}

double Coefficient::constant_value() const {
  if (const double* c = std::get_if<double>(&value_)) return *c;
  throw std::logic_error("coefficient is not constant");
}

bool Coefficient::spans(double horizon) const {
  if (is_constant()) return true;
  const auto& s = std::get<Samples>(value_);
  return s.t.front() <= 1e-12 * horizon && s.t.back() >= horizon * (1.0 - 1e-12);
}

CoefficientSchedule::CoefficientSchedule(double horizon, Coefficient a, Coefficient b,
                                         Coefficient c)
    : horizon_(horizon), a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
  if (!(horizon > 0.0)) throw std::invalid_argument("schedule horizon must be positive");
  if (!a_.spans(horizon) || !b_.spans(horizon) || !c_.spans(horizon))
    throw std::invalid_argument("sampled coefficient grids must span [0, T]");
}

// ---------------------------------------------------------------------------
// RiccatiSolution

RiccatiSolution::RiccatiSolution(Data d)
    : T_(d.T),
      t_(std::move(d.t)),
      A_(std::move(d.A)),
      B_(std::move(d.B)),
      C_(std::move(d.C)),
      I_(std::move(d.I)),
      status_(d.status),
      blow_up_time_(d.blow_up_time) {}

double RiccatiSolution::blow_up_time() const {
  if (!blow_up_time_) throw std::logic_error("solution did not blow up");
  return *blow_up_time_;
}

void RiccatiSolution::check_in_domain(double t) const {
  if (!(t >= 0.0 && t <= T_)) throw std::domain_error("time outside [0, T]");
  if (status_ == SolveStatus::BlowUp && t <= *blow_up_time_)
    throw std::domain_error("time lies in the blown-up region of the solution");
}

double RiccatiSolution::interpolate(std::span<const double> values, double t) const {
  check_in_domain(t);
  const double h = dt();
  const double pos = t / h;
  const std::size_t i = std::min(static_cast<std::size_t>(pos), values.size() - 2);
  const double f = pos - static_cast<double>(i);
  return (1.0 - f) * values[i] + f * values[i + 1];
}

double RiccatiSolution::A_at(double t) const { return interpolate(A_, t); }
double RiccatiSolution::B_at(double t) const { return interpolate(B_, t); }
double RiccatiSolution::C_at(double t) const { return interpolate(C_, t); }
double RiccatiSolution::I_at(double t) const { return interpolate(I_, t); }

// ---------------------------------------------------------------------------
// Numeric backward solver

namespace {

struct RiccatiState {
  double A, B, C, J;  // J(t) = int_t^T A, so J' = -A and J(T) = 0
};

struct RiccatiRhs {
  const CoefficientSchedule& sched;
  double delta2, lambda, M, M2;

  RiccatiState operator()(double t, const RiccatiState& s) const {
    const double a = sched.a().at(t);
    const double b = sched.b().at(t);
    const double c = sched.c().at(t);
    RiccatiState d;
    d.A = -a - 2.0 * s.A * s.A;
    d.B = -b - 2.0 * s.A * s.B - 2.0 * lambda * M * s.A;
    d.C = -c - 0.5 * s.B * s.B - delta2 * s.A - lambda * (s.A * M2 + s.B * M);
    d.J = -s.A;
    return d;
  }
};

RiccatiState rk4_step(const RiccatiRhs& rhs, double t, const RiccatiState& s, double h) {
  const RiccatiState k1 = rhs(t, s);
  auto advance = [&](const RiccatiState& k, double frac) {
    return RiccatiState{s.A + frac * h * k.A, s.B + frac * h * k.B, s.C + frac * h * k.C,
                        s.J + frac * h * k.J};
  };
  const RiccatiState k2 = rhs(t + 0.5 * h, advance(k1, 0.5));
  const RiccatiState k3 = rhs(t + 0.5 * h, advance(k2, 0.5));
  const RiccatiState k4 = rhs(t + h, advance(k3, 1.0));
  return RiccatiState{s.A + h / 6.0 * (k1.A + 2.0 * k2.A + 2.0 * k3.A + k4.A),
                      s.B + h / 6.0 * (k1.B + 2.0 * k2.B + 2.0 * k3.B + k4.B),
                      s.C + h / 6.0 * (k1.C + 2.0 * k2.C + 2.0 * k3.C + k4.C),
                      s.J + h / 6.0 * (k1.J + 2.0 * k2.J + 2.0 * k3.J + k4.J)};
}

bool tripped(const RiccatiState& s) {
  return !finite3(s.A, s.B, s.C) || !std::isfinite(s.J) || std::abs(s.A) > kBlowUpCap;
}

}  // namespace

RiccatiSolution solve_numeric(const CoefficientSchedule& sched, const TerminalData& term,
                              double delta, double lambda, const JumpDistribution& jump,
                              std::size_t steps) {
  if (steps < 16) throw std::invalid_argument("solve_numeric: need at least 16 steps");
  if (delta < 0.0 || lambda < 0.0)
    throw std::invalid_argument("solve_numeric: delta and lambda must be nonnegative");

  const double T = sched.horizon();
  const double h = T / static_cast<double>(steps);
  const RiccatiRhs rhs{sched, delta * delta, lambda, jump.mean(), jump.second_moment()};

  RiccatiSolution::Data data;
  data.T = T;
  data.t.resize(steps + 1);
  data.A.assign(steps + 1, std::numeric_limits<double>::quiet_NaN());
  data.B.assign(steps + 1, std::numeric_limits<double>::quiet_NaN());
  data.C.assign(steps + 1, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> J(steps + 1, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i <= steps; ++i) data.t[i] = static_cast<double>(i) * h;
  data.t[steps] = T;

  RiccatiState state{term.A_T, term.B_T, term.C_T, 0.0};
  data.A[steps] = state.A;
  data.B[steps] = state.B;
  data.C[steps] = state.C;
  J[steps] = 0.0;

  data.status = SolveStatus::Complete;
  for (std::size_t i = steps; i-- > 0;) {
    const double t_hi = data.t[i + 1];
    const RiccatiState next = rk4_step(rhs, t_hi, state, -h);
    if (tripped(next)) {
      // Bisect the partial step length to bracket the cap crossing tightly.
      double lo = 0.0, hi = h;  // integrating backward by `mid` stays finite at lo, trips at hi
      for (int iter = 0; iter < 60 && hi - lo > 1e-6 * h; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const RiccatiState probe = rk4_step(rhs, t_hi, state, -mid);
        (tripped(probe) ? hi : lo) = mid;
      }
      data.status = SolveStatus::BlowUp;
      data.blow_up_time = t_hi - 0.5 * (lo + hi);
      break;
    }
    state = next;
    data.A[i] = state.A;
    data.B[i] = state.B;
    data.C[i] = state.C;
    J[i] = state.J;
  }

  // I(t) = int_0^t A = J(0) - J(t). On blow-up the origin of the integral is
  // anchored at the first valid node instead, so differences I(t) - I(eta)
  // stay correct within the surviving region; nodes below the cut remain NaN.
  data.I.assign(steps + 1, std::numeric_limits<double>::quiet_NaN());
  std::size_t first_valid = steps;
  while (first_valid > 0 && std::isfinite(J[first_valid - 1])) --first_valid;
  for (std::size_t i = first_valid; i <= steps; ++i) data.I[i] = J[first_valid] - J[i];

  return RiccatiSolution(std::move(data));
}

// ---------------------------------------------------------------------------
// Closed forms for constant a, b

namespace {

struct ClosedForm {
  // A(t), B(t) and I(t) = int_0^t A for one branch family.
  std::function<double(double)> A, B, I;
  std::optional<double> blow_up_time;  // within (0, T): pole of the family
};

ClosedForm closed_form_positive_a(double a, double b, const TerminalData& term, double lambdaM,
                                  double T) {
  const double s = std::sqrt(0.5 * a);
  const double w = std::sqrt(2.0 * a);
  const double theta_T = std::atan(term.A_T / s);
  auto theta = [=](double t) { return theta_T + w * (T - t); };
  const double cos_T = std::cos(theta_T);
  const double sin_T = std::sin(theta_T);
  const double cos_0 = std::cos(theta(0.0));

  ClosedForm cf;
  cf.A = [=](double t) { return s * std::tan(theta(t)); };
  cf.B = [=](double t) {
    const double th = theta(t);
    return (cos_T * term.B_T + (b / w) * (std::sin(th) - sin_T) +
            lambdaM * (cos_T - std::cos(th))) /
           std::cos(th);
  };
  cf.I = [=](double t) { return 0.5 * std::log(std::abs(std::cos(theta(t)) / cos_0)); };

  // theta increases going backward from theta_T in (-pi/2, pi/2); the first
  // pole crossed is pi/2.
  const double t_pole = T - (0.5 * M_PI - theta_T) / w;
  if (t_pole >= 0.0) cf.blow_up_time = t_pole;
  return cf;
}

ClosedForm closed_form_negative_a(double a, double b, const TerminalData& term, double lambdaM,
                                  double T) {
  const double kappa = std::sqrt(-0.5 * a);
  const double w = std::sqrt(-2.0 * a);
  const double x_T = term.A_T / kappa;

  ClosedForm cf;
  if (std::abs(std::abs(x_T) - 1.0) < 1e-14) {
    // Equilibrium: A constant at +-kappa; B is a constant-coefficient linear ODE.
    const double A0 = term.A_T;
    const double g = (b + 2.0 * lambdaM * A0) / (2.0 * A0);
    cf.A = [=](double) { return A0; };
    cf.B = [=](double t) { return -g + (term.B_T + g) * std::exp(2.0 * A0 * (T - t)); };
    cf.I = [=](double t) { return A0 * t; };
    return cf;
  }

  if (std::abs(x_T) < 1.0) {
    // tanh family: relaxes backward toward -kappa, never blows up.
    const double psi_T = std::atanh(x_T);
    auto psi = [=](double t) { return psi_T - w * (T - t); };
    const double cosh_T = std::cosh(psi_T);
    const double sinh_T = std::sinh(psi_T);
    const double cosh_0 = std::cosh(psi(0.0));
    cf.A = [=](double t) { return kappa * std::tanh(psi(t)); };
    cf.B = [=](double t) {
      const double ps = psi(t);
      return (cosh_T * term.B_T + (b / w) * (sinh_T - std::sinh(ps)) +
              lambdaM * (cosh_T - std::cosh(ps))) /
             std::cosh(ps);
    };
    cf.I = [=](double t) { return 0.5 * std::log(std::cosh(psi(t)) / cosh_0); };
    return cf;
  }

  // coth family: |A_T| > kappa. The argument decreases backward; it reaches 0
  // (a pole of coth) only when it starts positive, i.e. A_T > kappa.
  const double psi_T = arcoth(x_T);
  auto psi = [=](double t) { return psi_T - w * (T - t); };
  const double sinh_T = std::sinh(psi_T);
  const double cosh_T = std::cosh(psi_T);
  const double sinh_0 = std::sinh(psi(0.0));
  cf.A = [=](double t) { return kappa / std::tanh(psi(t)); };
  cf.B = [=](double t) {
    const double ps = psi(t);
    return (sinh_T * term.B_T + (b / w) * (cosh_T - std::cosh(ps)) +
            lambdaM * (sinh_T - std::sinh(ps))) /
           std::sinh(ps);
  };
  cf.I = [=](double t) { return 0.5 * std::log(std::abs(std::sinh(psi(t)) / sinh_0)); };
  if (psi_T > 0.0) {
    const double t_pole = T - psi_T / w;
    if (t_pole >= 0.0) cf.blow_up_time = t_pole;
  }
  return cf;
}

ClosedForm closed_form_zero_a(double b, const TerminalData& term, double lambdaM, double T) {
  const double A_T = term.A_T;
  auto denom = [=](double t) { return 1.0 - 2.0 * A_T * (T - t); };
  const double denom_0 = denom(0.0);

  ClosedForm cf;
  cf.A = [=](double t) { return A_T / denom(t); };
  cf.B = [=](double t) {
    const double u = T - t;
    return (term.B_T + b * (u - A_T * u * u) + 2.0 * lambdaM * A_T * u) / denom(t);
  };
  cf.I = [=](double t) { return 0.5 * std::log(std::abs(denom(t) / denom_0)); };
  if (A_T > 0.0) {
    const double t_pole = T - 1.0 / (2.0 * A_T);
    if (t_pole >= 0.0) cf.blow_up_time = t_pole;
  }
  return cf;
}

}  // namespace

RiccatiSolution solve_closed_form_const(double a, double b, const TerminalData& term,
                                        double lambda, double jump_mean, double delta, double c,
                                        double T, std::size_t steps, double jump_second_moment) {
  if (steps < 16) throw std::invalid_argument("solve_closed_form_const: need at least 16 steps");
  if (!(T > 0.0)) throw std::invalid_argument("solve_closed_form_const: horizon must be positive");

  const double lambdaM = lambda * jump_mean;
  ClosedForm cf;
  if (a > 0.0)
    cf = closed_form_positive_a(a, b, term, lambdaM, T);
  else if (a < 0.0)
    cf = closed_form_negative_a(a, b, term, lambdaM, T);
  else
    cf = closed_form_zero_a(b, term, lambdaM, T);

  const double h = T / static_cast<double>(steps);
  RiccatiSolution::Data data;
  data.T = T;
  data.t.resize(steps + 1);
  data.A.resize(steps + 1);
  data.B.resize(steps + 1);
  data.C.resize(steps + 1);
  data.I.resize(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    const double t = (i == steps) ? T : static_cast<double>(i) * h;
    data.t[i] = t;
    data.A[i] = cf.A(t);
    data.B[i] = cf.B(t);
    data.I[i] = cf.I(t);
  }
  // Exact terminal values at the last node (the formulas reduce to them, but
  // pin them against rounding in theta/psi).
  data.A[steps] = term.A_T;
  data.B[steps] = term.B_T;

  // C by quadrature of C' = -c - B^2/2 - delta^2 A - lambda (A M2 + B M),
  // accumulated from the terminal end.
  std::vector<double> cdot(steps + 1, 0.0);
  for (std::size_t i = 0; i <= steps; ++i)
    cdot[i] = c + 0.5 * data.B[i] * data.B[i] + delta * delta * data.A[i] +
              lambda * (data.A[i] * jump_second_moment + data.B[i] * jump_mean);
  // G[i] = int_0^{t_i} cdot; C(t) = C_T + int_t^T cdot = C_T + (G[n] - G[i]).
  const std::vector<double> g = detail::cumulative_integral(cdot, h);
  for (std::size_t i = 0; i <= steps; ++i) data.C[i] = term.C_T + (g[steps] - g[i]);

  data.status = cf.blow_up_time ? SolveStatus::BlowUp : SolveStatus::Complete;
  data.blow_up_time = cf.blow_up_time;
  return RiccatiSolution(std::move(data));
}

double max_horizon(double a, double A_T) {
  if (!(a > 0.0))
    throw std::domain_error("max_horizon is defined for a > 0 only (no finite-horizon blow-up "
                            "backward for a <= 0 with admissible terminal data)");
  const double s = std::sqrt(0.5 * a);
  return (0.5 * M_PI - std::atan(A_T / s)) / std::sqrt(2.0 * a);
}

double value_function(const RiccatiSolution& sol, double t, double x) {
  return (sol.A_at(t) * x + sol.B_at(t)) * x + sol.C_at(t);
}

double optimal_control(const RiccatiSolution& sol, double t, double x) {
  return 2.0 * sol.A_at(t) * x + sol.B_at(t);
}

}  // namespace mfgjd
