#include "mfgjd/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "mfgjd/csv.hpp"
#include "mfgjd/density.hpp"
#include "mfgjd/errors.hpp"
#include "mfgjd/expectation.hpp"
#include "mfgjd/investor.hpp"
#include "mfgjd/montecarlo.hpp"
#include "mfgjd/riccati.hpp"

namespace mfgjd::cli {

namespace {

namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kConfigFailure = 1;
constexpr int kNumericalFailure = 2;
constexpr int kCrossCheckFailure = 3;

std::string time_suffix(double t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", t);
  return buf;
}

struct Context {
  ScenarioConfig cfg;
  fs::path out;
  bool quiet = false;

  void say(const std::string& line) const {
    if (!quiet) std::cout << line << '\n';
  }
  void write_report(const std::string& name, const std::string& text) const {
    std::ofstream f(out / name);
    f << text;
    if (!quiet) std::cout << text;
  }
};

RiccatiSolution solve(const Context& ctx) {
  return solve_numeric(ctx.cfg.sched(), ctx.cfg.terminal, ctx.cfg.delta, ctx.cfg.lambda,
                       ctx.cfg.jump, ctx.cfg.riccati_steps);
}

InitialSampler make_initial_sampler(const ScenarioConfig& cfg) {
  const double x0 = cfg.x0;
  if (cfg.initial_sd > 0.0) {
    const double sd = cfg.initial_sd;
    return [x0, sd](RngStream& rng) { return x0 + sd * rng.normal(); };
  }
  return [x0](RngStream&) { return x0; };
}

// The density engines may carry their own initial width; the Monte Carlo
// sampler always uses the problem-level law. Either choice leaves the
// expectation path untouched (it depends on the initial mean only).
double density_initial_sd(const ScenarioConfig& cfg) {
  if (cfg.density && cfg.density->initial_sd > 0.0) return cfg.density->initial_sd;
  return cfg.initial_sd;
}

InitialCharFn make_initial_cf(const ScenarioConfig& cfg) {
  const double sd = density_initial_sd(cfg);
  if (sd > 0.0) return gaussian_initial_cf(cfg.x0, sd);
  return delta_initial_cf(cfg.x0);
}

// ---------------------------------------------------------------------------

int run_riccati(const Context& ctx) {
  const auto sol = solve(ctx);
  std::ostringstream report;
  report << "riccati: steps=" << ctx.cfg.riccati_steps << " T=" << format_g17(ctx.cfg.T) << "\n";
  {
    CsvWriter csv((ctx.out / "riccati.csv").string(), {"t", "A", "B", "C"});
    for (std::size_t i = 0; i <= sol.steps(); ++i) {
      if (!std::isfinite(sol.A()[i])) continue;  // nodes below a blow-up cut
      csv.row({sol.times()[i], sol.A()[i], sol.B()[i], sol.C()[i]});
    }
  }
  if (!sol.complete()) {
    report << "status: blow-up at t = " << format_g17(sol.blow_up_time())
           << " (going backward from T)\n"
           << "the value coefficients do not exist on all of [0, T] for this horizon\n";
    ctx.write_report("riccati_report.txt", report.str());
    return kNumericalFailure;
  }
  report << "status: complete\n";
  ctx.write_report("riccati_report.txt", report.str());
  return kOk;
}

int run_expect(const Context& ctx) {
  const auto sol = solve(ctx);
  if (!sol.complete()) {
    ctx.write_report("expect_report.txt",
                     "expect: riccati blow-up at t = " + format_g17(sol.blow_up_time()) +
                         "; expectation quadrature requires a complete solution\n");
    return kNumericalFailure;
  }
  const double M = ctx.cfg.jump.mean();
  const auto quad = expectation_quadrature(sol, ctx.cfg.lambda, M, ctx.cfg.x0);

  const bool a_const = ctx.cfg.sched().a().is_constant();
  const bool b_const = ctx.cfg.sched().b().is_constant();
  std::optional<ExpectationPath> ode;
  if (a_const) ode = expectation_ivp(ctx.cfg.sched(), sol, ctx.cfg.lambda, M, ctx.cfg.x0);

  std::optional<ExpectationPath> closed;
  if (a_const && b_const && ctx.cfg.sched().a().constant_value() != 0.0) {
    const double a = ctx.cfg.sched().a().constant_value();
    const double b = ctx.cfg.sched().b().constant_value();
    try {
      const double E_T = terminal_expectation_const(a, b, ctx.cfg.terminal.A_T,
                                                    ctx.cfg.terminal.B_T, ctx.cfg.lambda, M,
                                                    ctx.cfg.T, ctx.cfg.x0);
      closed = corollary_closed_form(a, b, 0.0, 0.0, ctx.cfg.x0, E_T, ctx.cfg.T, sol.steps());
    } catch (const SingularHorizonError&) {
      // resonant horizon: column stays empty
    } catch (const ResonanceError&) {
    }
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  CsvWriter csv((ctx.out / "expect.csv").string(), {"t", "E_quadrature", "E_ode", "E_closed"});
  for (std::size_t i = 0; i < quad.t.size(); ++i)
    csv.row({quad.t[i], quad.E[i], ode ? ode->E[i] : nan, closed ? closed->E[i] : nan});
  ctx.say("expect: wrote " + (ctx.out / "expect.csv").string());
  return kOk;
}

int run_density(const Context& ctx) {
  if (!ctx.cfg.density) throw ConfigError("numerics.density: required by the density subcommand");
  const double sd = density_initial_sd(ctx.cfg);
  if (!(sd > 0.0))
    throw ConfigError("numerics.density.initial_sd: the finite-difference solver needs a "
                      "spreadable initial law (> 0, here or at problem.initial_sd)");
  const auto& dc = *ctx.cfg.density;
  const auto sol = solve(ctx);
  if (!sol.complete()) {
    ctx.write_report("density_report.txt",
                     "density: riccati blow-up at t = " + format_g17(sol.blow_up_time()) + "\n");
    return kNumericalFailure;
  }
  const auto initial_cf = make_initial_cf(ctx.cfg);
  const auto m0 = gaussian_density(dc.x_min, dc.x_max, dc.nx, ctx.cfg.x0, sd);

  std::vector<double> slice_times = ctx.cfg.output.slices;
  if (slice_times.empty()) slice_times = {ctx.cfg.T};

  const auto evo = kffp_fd_solve(sol, m0, ctx.cfg.delta, ctx.cfg.lambda, ctx.cfg.jump,
                                 dc.time_steps);

  for (double t : slice_times) {
    const auto cf = char_fn_grid(sol, ctx.cfg.jump, ctx.cfg.delta, ctx.cfg.lambda, initial_cf, t,
                                 dc.n_omega, dc.omega_max);
    if (ctx.cfg.output.write_charfn) {
      CsvWriter csv((ctx.out / ("charfn_t" + time_suffix(t) + ".csv")).string(),
                    {"omega", "re", "im"});
      for (std::size_t j = 0; j < cf.omega.size(); ++j)
        csv.row({cf.omega[j], cf.phi[j].real(), cf.phi[j].imag()});
    }
    const auto inverted = density_invert(cf);
    {
      CsvWriter csv((ctx.out / ("density_transform_t" + time_suffix(t) + ".csv")).string(),
                    {"x", "m"});
      for (std::size_t k = 0; k < inverted.x.size(); ++k)
        csv.row({inverted.x[k], inverted.m[k]});
    }
    const auto fd = evo.slice_at(t);
    {
      CsvWriter csv((ctx.out / ("density_fd_t" + time_suffix(t) + ".csv")).string(), {"x", "m"});
      for (std::size_t k = 0; k < fd.x.size(); ++k) csv.row({fd.x[k], fd.m[k]});
    }
  }
  ctx.say("density: wrote " + std::to_string(slice_times.size()) + " slice pair(s)");
  return kOk;
}

int run_simulate(const Context& ctx, const RunOptions& options) {
  if (!ctx.cfg.monte_carlo)
    throw ConfigError("numerics.monte_carlo: required by the simulate subcommand");
  const auto sol = solve(ctx);
  if (!sol.complete()) {
    ctx.write_report("simulate_report.txt",
                     "simulate: riccati blow-up at t = " + format_g17(sol.blow_up_time()) + "\n");
    return kNumericalFailure;
  }
  const auto& mc = *ctx.cfg.monte_carlo;
  SimulationSpec spec;
  spec.paths = mc.paths;
  spec.dt = ctx.cfg.T / static_cast<double>(mc.steps);
  spec.master_seed = options.seed ? *options.seed : mc.seed;
  spec.truncation_cap = mc.truncation_cap;
  spec.threads = mc.threads;
  spec.checkpoints = ctx.cfg.output.checkpoints;
  if (spec.checkpoints.empty()) {
    for (int k = 1; k <= 10; ++k)
      spec.checkpoints.push_back(ctx.cfg.T * static_cast<double>(k) / 10.0);
  }

  const auto stats = simulate_controlled(sol, make_initial_sampler(ctx.cfg), ctx.cfg.delta,
                                         ctx.cfg.lambda, ctx.cfg.jump, spec);
  CsvWriter csv((ctx.out / "simulate.csv").string(), {"t", "mean", "stderr", "m2", "n_escaped"});
  for (std::size_t k = 0; k < stats.times.size(); ++k)
    csv.row({stats.times[k], stats.mean[k], stats.stderror[k], stats.m2[k],
             static_cast<double>(stats.escaped)});
  ctx.say("simulate: " + std::to_string(spec.paths) + " paths, " +
          std::to_string(stats.escaped) + " escaped");
  return kOk;
}

int run_investor(const Context& ctx) {
  if (!ctx.cfg.investor) throw ConfigError("problem.investor: required by the investor subcommand");
  const auto& s = *ctx.cfg.investor;
  const auto dyn = opinion_dynamics(s, ctx.cfg.riccati_steps);
  const auto solv = solvability(s, s.horizon);
  const double R = hara_risk_coefficient(s.risk_exponent, s.volatility);

  std::ostringstream report;
  report << "investor scenario\n"
         << "  R  = " << format_g17(R) << "\n"
         << "  a  = " << format_g17(s.beta * R - s.gamma) << "\n"
         << "  Q* = " << format_g17(dyn.target.value()) << "\n"
         << "  regime: "
         << (dyn.regime == OpinionRegime::Consensus ? "Consensus" : "Disagreement") << "\n"
         << "  full-horizon solvable: " << (solv.full_horizon ? "yes" : "no") << "\n";
  if (solv.max_T) report << "  max solvable horizon: " << format_g17(*solv.max_T) << "\n";
  if (dyn.regime == OpinionRegime::Consensus)
    report << "  investors form an opinion near Q*\n";
  else
    report << "  opinions oscillate about Q* with period " << format_g17(2.0 * M_PI /
                std::sqrt(2.0 * (s.beta * R - s.gamma))) << "\n";
  ctx.write_report("investor_report.txt", report.str());

  CsvWriter csv((ctx.out / "investor_expectation.csv").string(), {"t", "E"});
  for (std::size_t i = 0; i < dyn.path.t.size(); ++i) csv.row({dyn.path.t[i], dyn.path.E[i]});
  return kOk;
}

// ---------------------------------------------------------------------------
// validate: run every applicable engine on the scenario and cross-check.

struct Check {
  std::string name;
  bool applicable = true;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

int run_validate(const Context& ctx, const RunOptions& options) {
  const auto& hook = ctx.cfg.validate_hook;
  auto perturb = [&](const std::string& engine) {
    return hook.perturb_engine == engine ? hook.perturb_amount : 0.0;
  };

  auto sol = solve(ctx);
  if (!sol.complete()) {
    ctx.write_report("validate_report.txt",
                     "validate: riccati blow-up at t = " + format_g17(sol.blow_up_time()) + "\n");
    return kNumericalFailure;
  }

  std::vector<Check> checks;
  const double M = ctx.cfg.jump.mean();
  const double M2 = ctx.cfg.jump.second_moment();
  const double h = sol.dt();
  const std::size_t n = sol.steps();

  // Riccati residuals by central differences; the hook may bump one node.
  {
    std::vector<double> A(sol.A().begin(), sol.A().end());
    std::vector<double> B(sol.B().begin(), sol.B().end());
    std::vector<double> C(sol.C().begin(), sol.C().end());
    if (const double eps = perturb("riccati"); eps != 0.0) A[n / 2] += eps;
    double worst = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      const double t = sol.times()[i];
      const double dA = (A[i + 1] - A[i - 1]) / (2.0 * h);
      const double dB = (B[i + 1] - B[i - 1]) / (2.0 * h);
      const double dC = (C[i + 1] - C[i - 1]) / (2.0 * h);
      const double a = ctx.cfg.sched().a().at(t);
      const double b = ctx.cfg.sched().b().at(t);
      const double c = ctx.cfg.sched().c().at(t);
      worst = std::max(worst, std::abs(dA + 2.0 * A[i] * A[i] + a));
      worst = std::max(worst,
                       std::abs(dB + 2.0 * A[i] * B[i] + 2.0 * ctx.cfg.lambda * M * A[i] + b));
      worst = std::max(worst, std::abs(dC + 0.5 * B[i] * B[i] +
                                       ctx.cfg.delta * ctx.cfg.delta * A[i] +
                                       ctx.cfg.lambda * (A[i] * M2 + B[i] * M) + c));
    }
    const double tol = std::max(1e-6, 100.0 * h * h * h * h);
    checks.push_back({"riccati_residual", true, worst, tol, worst < tol});
  }

  auto quad = expectation_quadrature(sol, ctx.cfg.lambda, M, ctx.cfg.x0);
  if (const double eps = perturb("quadrature"); eps != 0.0)
    for (double& v : quad.E) v += eps;

  const bool a_const = ctx.cfg.sched().a().is_constant();
  const bool b_const = ctx.cfg.sched().b().is_constant();
  const double a = a_const ? ctx.cfg.sched().a().constant_value() : 0.0;
  const double b = b_const ? ctx.cfg.sched().b().constant_value() : 0.0;

  // Second-order route against the quadrature route.
  if (a_const) {
    auto ode = expectation_ivp(ctx.cfg.sched(), sol, ctx.cfg.lambda, M, ctx.cfg.x0);
    if (const double eps = perturb("ode"); eps != 0.0)
      for (double& v : ode.E) v += eps;
    double sup = 0.0;
    for (std::size_t i = 0; i <= n; ++i) sup = std::max(sup, std::abs(ode.E[i] - quad.E[i]));
    checks.push_back({"expectation_quadrature_vs_ode", true, sup, 1e-6, sup < 1e-6});
  } else {
    checks.push_back({"expectation_quadrature_vs_ode", false, 0.0, 0.0, true});
  }

  // Closed-form route against the quadrature route.
  if (a_const && b_const && a != 0.0) {
    bool ran = false;
    try {
      double E_T = terminal_expectation_const(a, b, ctx.cfg.terminal.A_T, ctx.cfg.terminal.B_T,
                                              ctx.cfg.lambda, M, ctx.cfg.T, ctx.cfg.x0);
      E_T += perturb("terminal");
      const double terminal_err = std::abs(E_T - quad.E[n]);
      checks.push_back(
          {"terminal_closed_form_vs_quadrature", true, terminal_err, 1e-6, terminal_err < 1e-6});

      auto closed = corollary_closed_form(a, b, 0.0, 0.0, ctx.cfg.x0,
                                          E_T - perturb("terminal"), ctx.cfg.T, n);
      if (const double eps = perturb("closed"); eps != 0.0)
        for (double& v : closed.E) v += eps;
      double sup = 0.0;
      for (std::size_t i = 0; i <= n; ++i) sup = std::max(sup, std::abs(closed.E[i] - quad.E[i]));
      checks.push_back({"expectation_quadrature_vs_closed", true, sup, 1e-6, sup < 1e-6});
      ran = true;
    } catch (const SingularHorizonError&) {
    } catch (const ResonanceError&) {
    }
    if (!ran) {
      checks.push_back({"terminal_closed_form_vs_quadrature", false, 0.0, 0.0, true});
      checks.push_back({"expectation_quadrature_vs_closed", false, 0.0, 0.0, true});
    }
  } else {
    checks.push_back({"terminal_closed_form_vs_quadrature", false, 0.0, 0.0, true});
    checks.push_back({"expectation_quadrature_vs_closed", false, 0.0, 0.0, true});
  }

  // Monte Carlo confrontation at the checkpoints.
  if (ctx.cfg.monte_carlo) {
    const auto& mc = *ctx.cfg.monte_carlo;
    SimulationSpec spec;
    spec.paths = mc.paths;
    spec.dt = ctx.cfg.T / static_cast<double>(mc.steps);
    spec.master_seed = options.seed ? *options.seed : mc.seed;
    spec.truncation_cap = mc.truncation_cap;
    spec.threads = mc.threads;
    spec.checkpoints = ctx.cfg.output.checkpoints;
    if (spec.checkpoints.empty())
      for (int k = 1; k <= 5; ++k)
        spec.checkpoints.push_back(ctx.cfg.T * static_cast<double>(k) / 5.0);
    auto stats = simulate_controlled(sol, make_initial_sampler(ctx.cfg), ctx.cfg.delta,
                                     ctx.cfg.lambda, ctx.cfg.jump, spec);
    if (const double eps = perturb("montecarlo"); eps != 0.0)
      for (double& v : stats.mean) v += eps;
    double worst_gap = 0.0, worst_tol = 0.0, worst_margin = -1e300;
    bool ok = true;
    for (std::size_t k = 0; k < stats.times.size(); ++k) {
      const double gap = std::abs(stats.mean[k] - quad.at(stats.times[k]));
      // Statistical band plus a floor for deterministic runs (stderr = 0).
      const double tol = std::max(4.0 * stats.stderror[k], 1e-4);
      if (!(gap < tol)) ok = false;
      if (gap - tol > worst_margin) {
        worst_margin = gap - tol;
        worst_gap = gap;
        worst_tol = tol;
      }
    }
    checks.push_back({"montecarlo_vs_quadrature", true, worst_gap, worst_tol, ok});
  } else {
    checks.push_back({"montecarlo_vs_quadrature", false, 0.0, 0.0, true});
  }

  // Transform and finite-difference density engines.
  if (ctx.cfg.density && density_initial_sd(ctx.cfg) > 0.0) {
    const auto& dc = *ctx.cfg.density;
    const auto initial_cf = make_initial_cf(ctx.cfg);
    const double t_check = ctx.cfg.T;

    double cf_mean = mean_from_charfn(sol, ctx.cfg.jump, ctx.cfg.delta, ctx.cfg.lambda,
                                      initial_cf, t_check, ctx.cfg.x0);
    cf_mean += perturb("charfn");
    const double mean_err = std::abs(cf_mean - quad.E[n]);
    checks.push_back({"charfn_mean_vs_quadrature", true, mean_err, 1e-5, mean_err < 1e-5});

    const auto cf = char_fn_grid(sol, ctx.cfg.jump, ctx.cfg.delta, ctx.cfg.lambda, initial_cf,
                                 t_check, dc.n_omega, dc.omega_max);
    auto inverted = density_invert(cf);
    if (const double eps = perturb("inversion"); eps != 0.0)
      for (double& v : inverted.m) v += eps;
    const double mass_err = std::abs(inverted.mass() - 1.0);
    checks.push_back({"inversion_mass", true, mass_err, 1e-6, mass_err < 1e-6});
    const double mom_err = std::abs(inverted.first_moment() - quad.E[n]);
    checks.push_back({"inversion_moment_vs_quadrature", true, mom_err, 1e-4, mom_err < 1e-4});

    const auto m0 =
        gaussian_density(dc.x_min, dc.x_max, dc.nx, ctx.cfg.x0, density_initial_sd(ctx.cfg));
    const auto evo = kffp_fd_solve(sol, m0, ctx.cfg.delta, ctx.cfg.lambda, ctx.cfg.jump,
                                   dc.time_steps);
    auto fd = evo.slice_at(t_check);
    if (const double eps = perturb("fd"); eps != 0.0)
      for (double& v : fd.m) v += eps;
    const double fd_mom_err = std::abs(fd.first_moment() - quad.E[n]);
    checks.push_back({"fd_moment_vs_quadrature", true, fd_mom_err, 1e-3, fd_mom_err < 1e-3});

    // L1 distance on the finite-difference grid, transform side interpolated.
    double l1 = 0.0;
    {
      const double dxi = inverted.x[1] - inverted.x[0];
      for (std::size_t k = 0; k < fd.x.size(); ++k) {
        const double x = fd.x[k];
        double mi = 0.0;
        if (x >= inverted.x.front() && x <= inverted.x.back()) {
          const double pos = (x - inverted.x.front()) / dxi;
          const std::size_t j = std::min(static_cast<std::size_t>(pos), inverted.x.size() - 2);
          const double f = pos - static_cast<double>(j);
          mi = (1.0 - f) * inverted.m[j] + f * inverted.m[j + 1];
        }
        l1 += std::abs(fd.m[k] - mi);
      }
      l1 *= fd.dx();
    }
    checks.push_back({"fd_vs_inversion_l1", true, l1, 1e-2, l1 < 1e-2});
  } else {
    checks.push_back({"charfn_mean_vs_quadrature", false, 0.0, 0.0, true});
    checks.push_back({"inversion_mass", false, 0.0, 0.0, true});
    checks.push_back({"inversion_moment_vs_quadrature", false, 0.0, 0.0, true});
    checks.push_back({"fd_moment_vs_quadrature", false, 0.0, 0.0, true});
    checks.push_back({"fd_vs_inversion_l1", false, 0.0, 0.0, true});
  }

  std::ostringstream report;
  report << "cross-check table\n";
  bool any_fail = false;
  for (const auto& c : checks) {
    if (!c.applicable) {
      report << "  [skip] " << c.name << "\n";
      continue;
    }
    report << "  [" << (c.pass ? "pass" : "FAIL") << "] " << c.name
           << "  value=" << format_g17(c.value) << "  tol=" << format_g17(c.tolerance) << "\n";
    if (!c.pass) any_fail = true;
  }
  report << (any_fail ? "result: FAIL\n" : "result: pass\n");
  ctx.write_report("validate_report.txt", report.str());
  return any_fail ? kCrossCheckFailure : kOk;
}

}  // namespace

int run_subcommand(const std::string& command, const std::string& config_path,
                   const RunOptions& options) {
  try {
    Context ctx{load_config(config_path), {}, options.quiet};
    ctx.out = options.out_dir.empty() ? fs::path(ctx.cfg.output.dir) : fs::path(options.out_dir);
    fs::create_directories(ctx.out);

    if (command == "riccati") return run_riccati(ctx);
    if (command == "expect") return run_expect(ctx);
    if (command == "density") return run_density(ctx);
    if (command == "simulate") return run_simulate(ctx, options);
    if (command == "investor") return run_investor(ctx);
    if (command == "validate") return run_validate(ctx, options);
    throw ConfigError("unknown subcommand '" + command +
                      "' (expected riccati | expect | density | simulate | investor | validate)");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const std::exception& e) {
    // Blow-ups where not allowed, aliasing, CFL violations, mass leaks and
    // other numerical conditions.
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace mfgjd::cli
