#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mfgjd/investor.hpp"
#include "oracles.hpp"

using namespace mfgjd;

namespace {

InvestorScenario base_scenario() {
  InvestorScenario s;
  s.interest_rate = 0.02;
  s.volatility = 0.2;
  s.risk_exponent = 0.0;
  s.beta = 0.0;
  s.gamma = 1.0;
  s.reference_drift = 0.05;
  s.horizon = 10.0;
  s.initial_mean = 0.0;
  return s;
}

}  // namespace

TEST_CASE("risk coefficient") {
  CHECK(hara_risk_coefficient(0.0, 0.2) == doctest::Approx(12.5));
  CHECK(hara_risk_coefficient(0.5, 0.37) == 0.0);
  CHECK(hara_risk_coefficient(-1e6, 0.2) > 0.0);
  CHECK(hara_risk_coefficient(-1e6, 0.2) < 1e-4);  // vanishes in the extreme-averse limit
  CHECK_THROWS_AS(hara_risk_coefficient(1.0, 0.2), std::domain_error);
  CHECK_THROWS_AS(hara_risk_coefficient(1.5, 0.2), std::domain_error);
}

TEST_CASE("optimal fraction") {
  CHECK(optimal_fraction(0.03, 0.03, 0.2, 0.0) == 0.0);
  CHECK(optimal_fraction(0.1, 0.02, 0.2, 0.0) == doctest::Approx(2.0));
  // Doubling (1 - q) halves the fraction.
  const double h1 = optimal_fraction(0.1, 0.02, 0.2, 0.0);    // 1 - q = 1
  const double h2 = optimal_fraction(0.1, 0.02, 0.2, -1.0);   // 1 - q = 2
  CHECK(h1 == doctest::Approx(2.0 * h2));
  CHECK_THROWS_AS(optimal_fraction(0.1, 0.02, 0.2, 1.2), std::domain_error);
}

TEST_CASE("growth rate") {
  CHECK(growth_rate(0.03, 0.03, 0.2, 0.7) == doctest::Approx(0.03));
  CHECK(growth_rate(0.1, 0.02, 0.2, 0.0) == doctest::Approx(0.1));
  CHECK(growth_rate(0.37, 0.01, 0.5, 0.5) == doctest::Approx(0.01));  // q = 1/2 kills R
}

TEST_CASE("mapping to the coefficient problem") {
  SUBCASE("beta = 0 reduces to the pure tracking penalty") {
    auto s = base_scenario();
    const auto [sched, term] = to_mfg_problem(s);
    CHECK(sched.a().constant_value() == doctest::Approx(-1.0));
    CHECK(sched.b().constant_value() == doctest::Approx(2.0 * 0.05));
    CHECK(sched.c().constant_value() == doctest::Approx(-0.05 * 0.05));
    (void)term;
  }

  SUBCASE("growth reward shifts a by beta R") {
    auto s = base_scenario();
    s.beta = 1.0;
    s.gamma = 20.0;
    const auto [sched, term] = to_mfg_problem(s);
    CHECK(sched.a().constant_value() == doctest::Approx(12.5 - 20.0));
    (void)term;
  }

  SUBCASE("terminal polynomial identity") {
    auto s = base_scenario();
    s.beta = 0.7;
    s.gamma = 3.0;
    const auto [sched, term] = to_mfg_problem(s);
    (void)sched;
    const double R = hara_risk_coefficient(s.risk_exponent, s.volatility);
    std::mt19937 gen(3);
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    for (int i = 0; i < 5; ++i) {
      const double mu = unif(gen);
      const double poly = term.A_T * mu * mu + term.B_T * mu + term.C_T;
      const double target = s.interest_rate + R * (mu - s.interest_rate) * (mu - s.interest_rate);
      CHECK(poly == doctest::Approx(target).epsilon(1e-12));
      CHECK(poly == doctest::Approx(growth_rate(mu, s.interest_rate, s.volatility,
                                                s.risk_exponent)).epsilon(1e-12));
    }
  }
}

TEST_CASE("consensus point") {
  SUBCASE("beta = 0 pins it at the reference drift") {
    auto s = base_scenario();
    CHECK(consensus_point(s) == doctest::Approx(0.05).epsilon(1e-14));
  }

  SUBCASE("large gamma pulls it to the reference drift") {
    auto s = base_scenario();
    s.beta = 1.0;
    s.gamma = 1e9;
    CHECK(consensus_point(s) == doctest::Approx(s.reference_drift).epsilon(1e-6));
  }

  SUBCASE("matches the regime equilibrium of the mapped problem") {
    auto s = base_scenario();
    s.beta = 0.9;
    s.gamma = 4.0;
    const auto [sched, term] = to_mfg_problem(s);
    (void)term;
    const double a = sched.a().constant_value();
    const double b = sched.b().constant_value();
    CHECK(std::abs(consensus_point(s) - (-b / (2.0 * a))) < 1e-12);
  }

  SUBCASE("degenerate coupling") {
    auto s = base_scenario();
    s.volatility = 0.5;  // R = 1 / (2 * 0.25) = 2 exactly in binary
    s.beta = 1.0;
    s.gamma = 2.0;  // equals beta R
    CHECK_THROWS_AS(consensus_point(s), std::domain_error);
  }
}

TEST_CASE("solvability conditions") {
  SUBCASE("strong tracking but terminal data too large") {
    auto s = base_scenario();
    s.beta = 1.0;
    s.gamma = 200.0;  // a = -187.5 < 0, kappa ~ 9.68 < R = 12.5
    const auto v = solvability(s, 5.0);
    CHECK(!v.full_horizon);
    REQUIRE(v.max_T.has_value());
    // coth-family blow-up distance arcoth(R / kappa) / sqrt(-2a).
    const double kappa = std::sqrt(0.5 * 187.5);
    const double expected = 0.5 * std::log((12.5 / kappa + 1.0) / (12.5 / kappa - 1.0)) /
                            std::sqrt(2.0 * 187.5);
    CHECK(*v.max_T == doctest::Approx(expected).epsilon(1e-12));

    // Numeric verdict agrees: backing off below max_T solves, beyond blows up.
    const auto [sched, term] = to_mfg_problem(s);
    (void)sched;
    const auto ok = solve_closed_form_const(-187.5, sched.b().constant_value(), term, 0.0, 0.0,
                                            0.0, 0.0, 0.9 * *v.max_T, 1024);
    CHECK(ok.complete());
    const auto bad = solve_closed_form_const(-187.5, sched.b().constant_value(), term, 0.0, 0.0,
                                             0.0, 0.0, 1.5 * *v.max_T, 1024);
    CHECK(!bad.complete());
  }

  SUBCASE("weak coupling with small R solves every horizon") {
    auto s = base_scenario();
    s.risk_exponent = 0.499;  // R ~ 0.1, well below sqrt(gamma / 2)
    s.beta = 0.0;
    s.gamma = 1.0;
    const auto v = solvability(s, 100.0);
    CHECK(v.full_horizon);
    CHECK(!v.max_T.has_value());
  }

  SUBCASE("growth-dominated coupling has the tangent-family horizon") {
    auto s = base_scenario();
    s.beta = 1.0;
    s.gamma = 1.0;  // a = 11.5 > 0
    const auto v = solvability(s, 5.0);
    CHECK(!v.full_horizon);
    REQUIRE(v.max_T.has_value());
    CHECK(*v.max_T == doctest::Approx(max_horizon(11.5, 12.5)).epsilon(1e-12));
  }
}

TEST_CASE("crossing gamma through beta R flips the regime") {
  auto s = base_scenario();
  s.beta = 1.0;
  s.gamma = 12.0;  // a = 0.5 > 0
  auto [sched_low, t1] = to_mfg_problem(s);
  (void)t1;
  CHECK(classify_regime(sched_low.a().constant_value(), 0.0).kind == RegimeKind::Oscillatory);
  s.gamma = 13.0;  // a = -0.5 < 0
  auto [sched_high, t2] = to_mfg_problem(s);
  (void)t2;
  CHECK(classify_regime(sched_high.a().constant_value(), 0.0).kind == RegimeKind::Relaxing);
}

TEST_CASE("opinion dynamics") {
  SUBCASE("pure tracking reaches consensus at the reference drift") {
    auto s = base_scenario();  // a = -1, Q* = mu_bar = 0.05
    const auto dyn = opinion_dynamics(s);
    CHECK(dyn.regime == OpinionRegime::Consensus);
    CHECK(dyn.target.value() == doctest::Approx(0.05).epsilon(1e-14));
    const double midpoint = dyn.path.at(0.5 * s.horizon);
    CHECK(std::abs(midpoint - 0.05) < 0.01 * 0.05);
    CHECK(dyn.path.E.front() == doctest::Approx(0.0));
  }

  SUBCASE("growth-dominated coupling oscillates about the consensus point") {
    auto s = base_scenario();
    s.beta = 1.0;
    s.gamma = 1.0;  // a = 11.5
    s.horizon = 4.0;
    s.initial_mean = 0.0;
    const auto dyn = opinion_dynamics(s, 8192);
    CHECK(dyn.regime == OpinionRegime::Disagreement);
    const double a = 11.5;
    const double period = 2.0 * M_PI / std::sqrt(2.0 * a);
    const auto crossings = oracle::zero_crossings(dyn.path.t, dyn.path.E, dyn.target.value());
    REQUIRE(crossings.size() >= 3);
    const double dt = s.horizon / 8192.0;
    for (std::size_t i = 0; i + 2 < crossings.size(); ++i)
      CHECK(std::abs((crossings[i + 2] - crossings[i]) - period) < 2.0 * dt);
  }

  SUBCASE("one-sided jumps move the ends of the path, not the plateau") {
    auto s = base_scenario();
    s.lambda = 1.0;
    s.jump = JumpDistribution::one_sided_exponential(5.0);
    const auto with_jumps = opinion_dynamics(s);
    s.lambda = 0.0;
    const auto without = opinion_dynamics(s);
    CHECK(with_jumps.regime == OpinionRegime::Consensus);
    // The plateau level is unaffected by the jump drift...
    CHECK(std::abs(with_jumps.path.at(0.5 * s.horizon) - with_jumps.target.value()) <
          0.01 * with_jumps.target.value());
    // ...while the terminal boundary layer is not.
    CHECK(std::abs(with_jumps.path.E.back() - without.path.E.back()) > 1e-3);
  }
}
