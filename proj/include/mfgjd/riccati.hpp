#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "mfgjd/jump_models.hpp"

namespace mfgjd {

/// Time-dependent scalar coefficient: a constant, or samples on a grid
/// spanning [0, T] with linear interpolation in between.
class Coefficient {
 public:
  Coefficient(double constant) : value_(constant) {}  // NOLINT: implicit by design
  static Coefficient sampled(std::vector<double> t, std::vector<double> v);

  double at(double t) const;
  bool is_constant() const { return std::holds_alternative<double>(value_); }
  double constant_value() const;
  /// True when the coefficient is defined on all of [0, horizon] (constants
  /// always are; sampled grids must reach both ends).
  bool spans(double horizon) const;

 private:
  struct Samples {
    std::vector<double> t, v;
  };
  Coefficient() = default;
  std::variant<double, Samples> value_;
};

/// Running-cost coefficients a(t), b(t), c(t) on a fixed horizon.
class CoefficientSchedule {
 public:
  CoefficientSchedule(double horizon, Coefficient a, Coefficient b, Coefficient c);
  static CoefficientSchedule constants(double horizon, double a, double b, double c) {
    return CoefficientSchedule(horizon, Coefficient(a), Coefficient(b), Coefficient(c));
  }

  double horizon() const { return horizon_; }
  const Coefficient& a() const { return a_; }
  const Coefficient& b() const { return b_; }
  const Coefficient& c() const { return c_; }

 private:
  double horizon_;
  Coefficient a_, b_, c_;
};

struct TerminalData {
  double A_T = 0.0;
  double B_T = 0.0;
  double C_T = 0.0;
};

enum class SolveStatus { Complete, BlowUp };

/// Backward solution of the value-coefficient system on a uniform grid:
///
///   A' = -a - 2A^2
///   B' = -b - 2AB - 2*lambda*M*A
///   C' = -c - B^2/2 - delta^2*A - lambda*(A*M2 + B*M)
///
/// with A(T), B(T), C(T) given; M and M2 are the first two moments of the
/// jump law. The cumulative integral I(t) = int_0^t A is carried on the grid
/// because downstream formulas need exp(2*(I(t) - I(eta))).
///
/// On BlowUp status, blow_up_time() gives the first time, going backward from
/// T, at which |A| crossed the cap; node values at or below that time are NaN
/// for the numeric solver, and analytic-continuation values for the
/// closed-form solver.
class RiccatiSolution {
 public:
  double horizon() const { return T_; }
  std::size_t steps() const { return t_.size() - 1; }
  double dt() const { return T_ / static_cast<double>(steps()); }

  std::span<const double> times() const { return t_; }
  std::span<const double> A() const { return A_; }
  std::span<const double> B() const { return B_; }
  std::span<const double> C() const { return C_; }
  /// I[i] = int_0^{t_i} A(tau) dtau.
  std::span<const double> I() const { return I_; }

  SolveStatus status() const { return status_; }
  bool complete() const { return status_ == SolveStatus::Complete; }
  double blow_up_time() const;

  // Linear interpolation on the grid. Valid on [0, T] for complete solutions,
  // and strictly above the blow-up time otherwise.
  double A_at(double t) const;
  double B_at(double t) const;
  double C_at(double t) const;
  double I_at(double t) const;

  struct Data {
    double T;
    std::vector<double> t, A, B, C, I;
    SolveStatus status;
    std::optional<double> blow_up_time;
  };
  explicit RiccatiSolution(Data d);

 private:
  double interpolate(std::span<const double> values, double t) const;
  void check_in_domain(double t) const;

  double T_;
  std::vector<double> t_, A_, B_, C_, I_;
  SolveStatus status_;
  std::optional<double> blow_up_time_;
};

/// Fixed-step classical fourth-order backward integration from t = T.
/// Detects blow-up by the cap |A| > 1e8 (or any non-finite value) and
/// brackets the crossing time within one grid step by bisection.
RiccatiSolution solve_numeric(const CoefficientSchedule& sched, const TerminalData& term,
                              double delta, double lambda, const JumpDistribution& jump,
                              std::size_t steps);

/// Closed forms for constant a and b, evaluated on the grid. A and B come
/// from the explicit tan/tanh/coth/rational families (see docs/derivations.md);
/// C is integrated by quadrature of its linear equation. jump_mean and
/// jump_second_moment are the first two moments of the jump law.
RiccatiSolution solve_closed_form_const(double a, double b, const TerminalData& term,
                                        double lambda, double jump_mean, double delta, double c,
                                        double T, std::size_t steps,
                                        double jump_second_moment = 0.0);

/// Largest horizon for which the backward A-solution stays finite when a > 0:
/// (pi/2 - arctan(A_T * sqrt(2/a))) / sqrt(2a). Throws for a <= 0.
double max_horizon(double a, double A_T);

/// Quadratic value surface A(t)x^2 + B(t)x + C(t).
double value_function(const RiccatiSolution& sol, double t, double x);

/// Feedback drift 2A(t)x + B(t) (the maximizer of alpha*dPhi/dx - alpha^2/2).
double optimal_control(const RiccatiSolution& sol, double t, double x);

}  // namespace mfgjd
