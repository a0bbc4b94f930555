#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mfgjd/riccati.hpp"
#include "oracles.hpp"

using namespace mfgjd;

namespace {

const JumpDistribution kNoJump = JumpDistribution::degenerate(0.0);

double sup_diff(std::span<const double> a, std::span<const double> b) {
  double sup = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sup = std::max(sup, std::abs(a[i] - b[i]));
  return sup;
}

}  // namespace

TEST_CASE("zero data give constant solutions") {
  const auto sched = CoefficientSchedule::constants(1.0, 0.0, 0.0, 0.0);
  const auto sol = solve_numeric(sched, {0.0, 0.0, 5.0}, 0.0, 0.0, kNoJump, 64);
  REQUIRE(sol.complete());
  for (std::size_t i = 0; i <= sol.steps(); ++i) {
    CHECK(sol.A()[i] == 0.0);
    CHECK(sol.B()[i] == 0.0);
    CHECK(sol.C()[i] == 5.0);
  }
}

TEST_CASE("A(t) reproduces the tangent solution for a = 1") {
  // With A_T = 0 the A-equation has the explicit backward solution
  // sqrt(1/2) tan(sqrt(2) (T - t)).
  const double T = 0.5;
  const auto sched = CoefficientSchedule::constants(T, 1.0, 0.0, 0.0);
  const auto sol = solve_numeric(sched, {0.0, 0.0, 0.0}, 0.0, 0.0, kNoJump, 4096);
  REQUIRE(sol.complete());
  for (std::size_t i = 0; i <= sol.steps(); i += 57) {
    const double t = sol.times()[i];
    const double expected = std::sqrt(0.5) * std::tan(std::sqrt(2.0) * (T - t));
    CHECK(std::abs(sol.A()[i] - expected) < 1e-8);
  }
}

TEST_CASE("terminal conditions are met exactly at the last node") {
  const TerminalData term{0.4, -0.3, 2.0};
  const auto sched = CoefficientSchedule::constants(0.7, -1.0, 0.5, 0.2);
  const auto numeric = solve_numeric(sched, term, 0.5, 1.0,
                                     JumpDistribution::one_sided_exponential(2.0), 256);
  CHECK(numeric.A().back() == term.A_T);
  CHECK(numeric.B().back() == term.B_T);
  CHECK(numeric.C().back() == term.C_T);

  const auto closed = solve_closed_form_const(-1.0, 0.5, term, 1.0, 0.5, 0.5, 0.2, 0.7, 256, 0.5);
  CHECK(closed.A().back() == term.A_T);
  CHECK(closed.B().back() == term.B_T);
  CHECK(closed.C().back() == term.C_T);
}

TEST_CASE("central-difference residuals stay below tolerance") {
  // Horizon kept away from the tangent-family pole so the third derivatives
  // that drive the central-difference truncation error stay moderate.
  const double T = 0.5;
  const double a = 1.0, b = 0.4, c = 0.3, delta = 0.7, lambda = 1.5;
  const auto jump = JumpDistribution::one_sided_exponential(2.0);
  const auto sched = CoefficientSchedule::constants(T, a, b, c);
  const auto sol = solve_numeric(sched, {0.2, 0.1, 0.0}, delta, lambda, jump, 4096);
  REQUIRE(sol.complete());
  const double h = sol.dt();
  const double M = jump.mean(), M2 = jump.second_moment();
  const double tol = std::max(1e-6, 100.0 * h * h * h * h);
  for (std::size_t i = 1; i < sol.steps(); ++i) {
    const double dA = (sol.A()[i + 1] - sol.A()[i - 1]) / (2.0 * h);
    const double dB = (sol.B()[i + 1] - sol.B()[i - 1]) / (2.0 * h);
    const double dC = (sol.C()[i + 1] - sol.C()[i - 1]) / (2.0 * h);
    CHECK(std::abs(dA + 2.0 * sol.A()[i] * sol.A()[i] + a) < tol);
    CHECK(std::abs(dB + 2.0 * sol.A()[i] * sol.B()[i] + 2.0 * lambda * M * sol.A()[i] + b) < tol);
    CHECK(std::abs(dC + 0.5 * sol.B()[i] * sol.B()[i] + delta * delta * sol.A()[i] +
                   lambda * (sol.A()[i] * M2 + sol.B()[i] * M) + c) < tol);
  }
}

TEST_CASE("closed form matches the numeric integrator") {
  SUBCASE("a > 0 with b = 0") {
    const auto num = solve_numeric(CoefficientSchedule::constants(0.5, 1.0, 0.0, 0.0),
                                   {0.0, 1.0, 0.0}, 0.0, 0.0, kNoJump, 4096);
    const auto cf = solve_closed_form_const(1.0, 0.0, {0.0, 1.0, 0.0}, 0.0, 0.0, 0.0, 0.0, 0.5,
                                            4096);
    REQUIRE(num.complete());
    REQUIRE(cf.complete());
    CHECK(sup_diff(num.A(), cf.A()) < 1e-8);
    CHECK(sup_diff(num.B(), cf.B()) < 1e-8);
    CHECK(sup_diff(num.C(), cf.C()) < 1e-8);
  }

  SUBCASE("a < 0 with jumps") {
    // lambda * M = 0.2 realized with an exponential law of mean 0.1.
    const double lambda = 2.0;
    const auto jump = JumpDistribution::one_sided_exponential(10.0);
    const auto num = solve_numeric(CoefficientSchedule::constants(3.0, -1.0, 2.0, 0.0),
                                   {0.3, 0.0, 0.0}, 0.0, lambda, jump, 4096);
    const auto cf = solve_closed_form_const(-1.0, 2.0, {0.3, 0.0, 0.0}, lambda, jump.mean(), 0.0,
                                            0.0, 3.0, 4096, jump.second_moment());
    REQUIRE(num.complete());
    REQUIRE(cf.complete());
    CHECK(sup_diff(num.A(), cf.A()) < 1e-7);
    CHECK(sup_diff(num.B(), cf.B()) < 1e-7);
    CHECK(sup_diff(num.C(), cf.C()) < 1e-7);
  }

  SUBCASE("a = 0 rational family") {
    const auto num = solve_numeric(CoefficientSchedule::constants(1.0, 0.0, 0.7, 0.1),
                                   {-0.4, 0.2, 0.0}, 0.3, 1.0,
                                   JumpDistribution::degenerate(0.5), 4096);
    const auto cf = solve_closed_form_const(0.0, 0.7, {-0.4, 0.2, 0.0}, 1.0, 0.5, 0.3, 0.1, 1.0,
                                            4096, 0.25);
    REQUIRE(num.complete());
    REQUIRE(cf.complete());
    CHECK(sup_diff(num.A(), cf.A()) < 1e-7);
    CHECK(sup_diff(num.B(), cf.B()) < 1e-7);
    CHECK(sup_diff(num.C(), cf.C()) < 1e-7);
  }

  SUBCASE("a < 0 coth family, terminal data above the equilibrium level") {
    // kappa = 1, A_T = 1.5 > kappa: blows up backward at distance arcoth(1.5)/2.
    const double a = -2.0, A_T = 1.5;
    const double dist = 0.5 * std::log((1.5 + 1.0) / (1.5 - 1.0)) / 2.0;
    const double T = 0.8 * dist;  // stay inside the solvable window
    const auto num = solve_numeric(CoefficientSchedule::constants(T, a, 1.0, 0.0),
                                   {A_T, 0.5, 0.0}, 0.0, 0.0, kNoJump, 4096);
    const auto cf = solve_closed_form_const(a, 1.0, {A_T, 0.5, 0.0}, 0.0, 0.0, 0.0, 0.0, T, 4096);
    REQUIRE(num.complete());
    REQUIRE(cf.complete());
    CHECK(sup_diff(num.A(), cf.A()) < 1e-6);
    CHECK(sup_diff(num.B(), cf.B()) < 1e-6);
  }

  SUBCASE("random spot checks across sign families") {
    std::mt19937 gen(42);
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    for (double a : {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0}) {
      for (int rep = 0; rep < 3; ++rep) {
        const TerminalData term{unif(gen), unif(gen), unif(gen)};
        const double b = unif(gen);
        double T = 1.0;
        if (a > 0.0) T = 0.8 * max_horizon(a, term.A_T);
        const auto num = solve_numeric(CoefficientSchedule::constants(T, a, b, 0.0), term, 0.4,
                                       0.8, JumpDistribution::degenerate(0.3), 4096);
        const auto cf =
            solve_closed_form_const(a, b, term, 0.8, 0.3, 0.4, 0.0, T, 4096, 0.09);
        REQUIRE(num.complete());
        REQUIRE(cf.complete());
        CHECK(sup_diff(num.A(), cf.A()) < 1e-6);
        CHECK(sup_diff(num.B(), cf.B()) < 1e-6);
        CHECK(sup_diff(num.C(), cf.C()) < 1e-6);
      }
    }
  }
}

TEST_CASE("max_horizon") {
  CHECK(max_horizon(2.0, 0.0) == doctest::Approx(M_PI / 4.0).epsilon(1e-12));
  CHECK(max_horizon(0.5, 0.0) == doctest::Approx(M_PI / 2.0).epsilon(1e-12));
  CHECK(max_horizon(1.0, 1e9) < 1e-8);  // huge terminal data leave no room
  CHECK_THROWS_AS(max_horizon(-1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(max_horizon(0.0, 0.0), std::domain_error);
}

TEST_CASE("numeric blow-up is bracketed near the analytic horizon") {
  SUBCASE("a = 2, A_T = 0, T = 1") {
    const auto sol = solve_numeric(CoefficientSchedule::constants(1.0, 2.0, 0.0, 0.0),
                                   {0.0, 0.0, 0.0}, 0.0, 0.0, kNoJump, 4096);
    REQUIRE(!sol.complete());
    const double expected = 1.0 - M_PI / 4.0;
    CHECK(std::abs(sol.blow_up_time() - expected) < 2.0 * sol.dt());
  }
  SUBCASE("closed form reports the same cut") {
    const auto cf =
        solve_closed_form_const(2.0, 0.0, {0.0, 0.0, 0.0}, 0.0, 0.0, 0.0, 0.0, 1.0, 4096);
    REQUIRE(!cf.complete());
    CHECK(cf.blow_up_time() == doctest::Approx(1.0 - M_PI / 4.0).epsilon(1e-9));
  }
  SUBCASE("non-finite intermediates never escape as exceptions") {
    const auto sol = solve_numeric(CoefficientSchedule::constants(5.0, 4.0, 1.0, 1.0),
                                   {2.0, 1.0, 0.0}, 1.0, 1.0, kNoJump, 512);
    CHECK(!sol.complete());
    CHECK(sol.blow_up_time() > 0.0);
  }
}

TEST_CASE("lambda enters A never, and B only through lambda * M") {
  const auto jump_sym = JumpDistribution::symmetrized(JumpDistribution::one_sided_exponential(1.0));
  const auto sched = CoefficientSchedule::constants(1.0, -0.5, 0.3, 0.1);
  const TerminalData term{0.2, -0.1, 0.0};
  const auto base = solve_numeric(sched, term, 0.5, 0.0, jump_sym, 512);
  for (double lambda : {1.0, 5.0}) {
    const auto sol = solve_numeric(sched, term, 0.5, lambda, jump_sym, 512);
    for (std::size_t i = 0; i <= sol.steps(); ++i) {
      CHECK(sol.A()[i] == base.A()[i]);  // bit-identical
      CHECK(sol.B()[i] == base.B()[i]);  // M = 0 removes lambda from B entirely
    }
  }
}

TEST_CASE("value function and optimal control") {
  SUBCASE("constant surfaces") {
    const auto sol = solve_numeric(CoefficientSchedule::constants(1.0, 0.0, 0.0, 0.0),
                                   {0.0, 0.0, 5.0}, 0.0, 0.0, kNoJump, 64);
    CHECK(value_function(sol, 0.3, -2.0) == doctest::Approx(5.0));
    CHECK(optimal_control(sol, 0.3, -2.0) == doctest::Approx(0.0));
  }

  SUBCASE("terminal slice matches the terminal polynomial") {
    const TerminalData term{1.0, 2.0, 0.0};
    const auto sol = solve_numeric(CoefficientSchedule::constants(0.4, -1.0, 0.0, 0.0), term, 0.0,
                                   0.0, kNoJump, 64);
    for (double x : {-1.0, 0.0, 3.0})
      CHECK(value_function(sol, 0.4, x) == doctest::Approx(term.A_T * x * x + term.B_T * x));
    CHECK(value_function(sol, 0.4, 3.0) == doctest::Approx(15.0));
  }

  SUBCASE("control equals the spatial derivative of the value surface") {
    const auto sol = solve_numeric(CoefficientSchedule::constants(0.8, -0.7, 0.4, 0.1),
                                   {0.3, -0.2, 0.5}, 0.4, 1.0,
                                   JumpDistribution::one_sided_exponential(3.0), 1024);
    for (double t : {0.1, 0.45, 0.8}) {
      for (double x : {-2.0, 0.5, 1.5}) {
        const double fd = oracle::central_diff(
            [&](double xx) { return value_function(sol, t, xx); }, x, 1e-6);
        CHECK(std::abs(optimal_control(sol, t, x) - fd) < 1e-8);
      }
    }
  }

  SUBCASE("domain errors") {
    const auto sol = solve_numeric(CoefficientSchedule::constants(1.0, 2.0, 0.0, 0.0),
                                   {0.0, 0.0, 0.0}, 0.0, 0.0, kNoJump, 256);
    REQUIRE(!sol.complete());
    CHECK_THROWS_AS(value_function(sol, 0.05, 0.0), std::domain_error);
    CHECK_THROWS_AS(value_function(sol, 1.5, 0.0), std::domain_error);
    CHECK_NOTHROW(value_function(sol, 0.99, 0.0));
  }
}

TEST_CASE("sampled coefficient schedules interpolate linearly") {
  auto a = Coefficient::sampled({0.0, 0.5, 1.0}, {1.0, 2.0, 1.0});
  CHECK(a.at(0.25) == doctest::Approx(1.5));
  CHECK(a.at(0.75) == doctest::Approx(1.5));
  CHECK(!a.is_constant());

  // Grids that do not reach both ends of the horizon are rejected.
  CHECK_THROWS_AS(CoefficientSchedule(2.0, Coefficient::sampled({0.0, 1.0}, {0.1, 0.2}),
                                      Coefficient(0.0), Coefficient(0.0)),
                  std::invalid_argument);
}

TEST_CASE("numeric solver handles time-varying coefficients") {
  const CoefficientSchedule sched(1.0, Coefficient::sampled({0.0, 0.5, 1.0}, {0.2, 0.6, 0.2}),
                                  Coefficient::sampled({0.0, 1.0}, {0.3, -0.3}),
                                  Coefficient(0.0));
  const auto sol = solve_numeric(sched, {0.1, 0.2, 0.0}, 0.3, 0.0, kNoJump, 4096);
  REQUIRE(sol.complete());
  const double h = sol.dt();
  const double tol = std::max(1e-6, 100.0 * h * h * h * h);
  // The piecewise-linear coefficients have derivative kinks at the sample
  // nodes; skip the two interior nodes adjacent to them.
  for (std::size_t i = 1; i < sol.steps(); ++i) {
    const double t = sol.times()[i];
    if (std::abs(t - 0.5) < 2.0 * h) continue;
    const double dA = (sol.A()[i + 1] - sol.A()[i - 1]) / (2.0 * h);
    const double dB = (sol.B()[i + 1] - sol.B()[i - 1]) / (2.0 * h);
    CHECK(std::abs(dA + 2.0 * sol.A()[i] * sol.A()[i] + sched.a().at(t)) < tol);
    CHECK(std::abs(dB + 2.0 * sol.A()[i] * sol.B()[i] + sched.b().at(t)) < tol);
  }
}
