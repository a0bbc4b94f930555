#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mfgjd/config.hpp"
#include "mfgjd/errors.hpp"
#include "mfgjd/runner.hpp"

using namespace mfgjd;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::current_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string write_file(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir / name;
  std::ofstream f(p);
  f << text;
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

// Scenario with gentle feedback: every validate engine applies.
std::string cross_check_scenario(const std::string& perturb_engine = "") {
  std::string hook;
  if (!perturb_engine.empty())
    hook = R"(, "validate": {"perturb_engine": ")" + perturb_engine + R"("})";
  return R"json({
  "problem": {
    "T": 1.0, "delta": 0.0, "lambda": 0.0,
    "coefficients": {"a": -0.01, "b": 0.2, "c": 0.0},
    "terminal": {"A_T": 0.0, "B_T": 0.1, "C_T": 0.0},
    "x0": 1.0
  },
  "numerics": {
    "riccati_steps": 2048,
    "monte_carlo": {"paths": 256, "steps": 20000, "seed": 7},
    "density": {"n_omega": 1024, "omega_max": 32.0, "initial_sd": 0.6,
                "x_min": -12.0, "x_max": 12.0, "nx": 2048, "time_steps": 2000}
  })json" +
         hook + "\n}";
}

}  // namespace

TEST_CASE("config parsing and field-path diagnostics") {
  SUBCASE("missing horizon") {
    try {
      parse_config_text(R"({"problem": {"coefficients": {"a": 0, "b": 0, "c": 0},
                          "terminal": {"A_T": 0, "B_T": 0, "C_T": 0}}})");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("problem.T") != std::string::npos);
    }
  }

  SUBCASE("either raw coefficients or investor parameters, not both") {
    const char* both = R"({"problem": {"T": 1.0,
      "coefficients": {"a": 0, "b": 0, "c": 0},
      "terminal": {"A_T": 0, "B_T": 0, "C_T": 0},
      "investor": {"r": 0.02, "sigma": 0.2, "q": 0, "beta": 0, "gamma": 1, "mu_bar": 0.05}}})";
    CHECK_THROWS_AS(parse_config_text(both), ConfigError);
    const char* neither = R"({"problem": {"T": 1.0}})";
    CHECK_THROWS_AS(parse_config_text(neither), ConfigError);
  }

  SUBCASE("module invariants are enforced at load time") {
    try {
      parse_config_text(R"({"problem": {"T": 1.0, "jump": {"kind": "exp_positive", "rate": -2.0},
        "coefficients": {"a": 0, "b": 0, "c": 0},
        "terminal": {"A_T": 0, "B_T": 0, "C_T": 0}}})");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("problem.jump") != std::string::npos);
    }
    try {
      parse_config_text(R"({"problem": {"T": 1.0,
        "investor": {"r": 0.02, "sigma": -0.2, "q": 0, "beta": 0, "gamma": 1, "mu_bar": 0.05}}})");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("problem.investor") != std::string::npos);
    }
  }

  SUBCASE("investor parameters resolve to the mapped coefficient problem") {
    const auto cfg = parse_config_text(R"({"problem": {"T": 2.0, "x0": 0.0,
      "investor": {"r": 0.02, "sigma": 0.2, "q": 0.0, "beta": 0.0, "gamma": 1.0,
                   "mu_bar": 0.05}}})");
    REQUIRE(cfg.investor.has_value());
    CHECK(cfg.sched().a().constant_value() == doctest::Approx(-1.0));
    CHECK(cfg.terminal.A_T == doctest::Approx(12.5));
  }

  SUBCASE("unknown subcommand is a config failure") {
    TempDir tmp("cli_tmp_unknown");
    const auto cfgp = write_file(tmp.path, "s.json", cross_check_scenario());
    cli::RunOptions opt;
    opt.out_dir = (tmp.path / "out").string();
    opt.quiet = true;
    CHECK(cli::run_subcommand("frobnicate", cfgp, opt) == 1);
    CHECK(cli::run_subcommand("expect", (tmp.path / "missing.json").string(), opt) == 1);
  }
}

TEST_CASE("riccati subcommand writes the table and reports blow-up with exit 2") {
  TempDir tmp("cli_tmp_riccati");
  cli::RunOptions opt;
  opt.quiet = true;

  SUBCASE("complete run") {
    const auto cfgp = write_file(tmp.path, "ok.json", cross_check_scenario());
    opt.out_dir = (tmp.path / "ok").string();
    CHECK(cli::run_subcommand("riccati", cfgp, opt) == 0);
    const auto csv = slurp(fs::path(opt.out_dir) / "riccati.csv");
    CHECK(csv.rfind("t,A,B,C\n", 0) == 0);
    const auto report = slurp(fs::path(opt.out_dir) / "riccati_report.txt");
    CHECK(report.find("status: complete") != std::string::npos);
  }

  SUBCASE("blow-up run exits 2 and names the time") {
    const auto cfgp = write_file(tmp.path, "blow.json", R"({"problem": {
      "T": 1.0, "coefficients": {"a": 2.0, "b": 0.0, "c": 0.0},
      "terminal": {"A_T": 0.0, "B_T": 0.0, "C_T": 0.0}, "x0": 0.0}})");
    opt.out_dir = (tmp.path / "blow").string();
    CHECK(cli::run_subcommand("riccati", cfgp, opt) == 2);
    const auto report = slurp(fs::path(opt.out_dir) / "riccati_report.txt");
    CHECK(report.find("blow-up at t = ") != std::string::npos);
    // Reported time is near T - pi/4.
    const auto pos = report.find("blow-up at t = ");
    const double reported = std::stod(report.substr(pos + 15));
    CHECK(std::abs(reported - (1.0 - M_PI / 4.0)) < 2.0 / 4096.0);
  }
}

TEST_CASE("expect subcommand emits all applicable columns") {
  TempDir tmp("cli_tmp_expect");
  const auto cfgp = write_file(tmp.path, "s.json", cross_check_scenario());
  cli::RunOptions opt;
  opt.out_dir = (tmp.path / "out").string();
  opt.quiet = true;
  REQUIRE(cli::run_subcommand("expect", cfgp, opt) == 0);
  std::ifstream csv(fs::path(opt.out_dir) / "expect.csv");
  std::string header, first;
  std::getline(csv, header);
  std::getline(csv, first);
  CHECK(header == "t,E_quadrature,E_ode,E_closed");
  // All methods start at x0 = 1.
  std::replace(first.begin(), first.end(), ',', ' ');
  std::istringstream row(first);
  double t0, eq, eo, ec;
  row >> t0 >> eq >> eo >> ec;
  CHECK(t0 == 0.0);
  CHECK(eq == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(eo == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ec == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("simulate and density subcommands produce their artifact files") {
  TempDir tmp("cli_tmp_artifacts");
  const auto cfgp = write_file(tmp.path, "s.json", cross_check_scenario());
  cli::RunOptions opt;
  opt.out_dir = (tmp.path / "out").string();
  opt.quiet = true;
  REQUIRE(cli::run_subcommand("simulate", cfgp, opt) == 0);
  const auto sim = slurp(fs::path(opt.out_dir) / "simulate.csv");
  CHECK(sim.rfind("t,mean,stderr,m2,n_escaped\n", 0) == 0);

  REQUIRE(cli::run_subcommand("density", cfgp, opt) == 0);
  CHECK(fs::exists(fs::path(opt.out_dir) / "density_transform_t1.csv"));
  CHECK(fs::exists(fs::path(opt.out_dir) / "density_fd_t1.csv"));
}

TEST_CASE("investor subcommand reports the regime") {
  TempDir tmp("cli_tmp_investor");
  const auto cfgp = write_file(tmp.path, "s.json", R"({"problem": {
    "T": 10.0, "x0": 0.0, "initial_sd": 0.1,
    "investor": {"r": 0.02, "sigma": 0.2, "q": 0.0, "beta": 0.0, "gamma": 1.0,
                 "mu_bar": 0.05}}})");
  cli::RunOptions opt;
  opt.out_dir = (tmp.path / "out").string();
  opt.quiet = true;
  REQUIRE(cli::run_subcommand("investor", cfgp, opt) == 0);
  const auto report = slurp(fs::path(opt.out_dir) / "investor_report.txt");
  CHECK(report.find("regime: Consensus") != std::string::npos);
  CHECK(report.find("Q* = 0.05") != std::string::npos);
  CHECK(fs::exists(fs::path(opt.out_dir) / "investor_expectation.csv"));
}

TEST_CASE("validate passes clean scenarios") {
  TempDir tmp("cli_tmp_validate");
  cli::RunOptions opt;
  opt.quiet = true;

  SUBCASE("trivial scenario") {
    const auto cfgp = write_file(tmp.path, "trivial.json", R"({"problem": {
      "T": 1.0, "delta": 0.0, "lambda": 0.0,
      "coefficients": {"a": 0.0, "b": 0.0, "c": 0.0},
      "terminal": {"A_T": 0.0, "B_T": 0.0, "C_T": 0.0}, "x0": 1.0},
      "numerics": {"riccati_steps": 1024,
                   "monte_carlo": {"paths": 200, "steps": 1000, "seed": 3}}})");
    opt.out_dir = (tmp.path / "trivial").string();
    CHECK(cli::run_subcommand("validate", cfgp, opt) == 0);
    const auto report = slurp(fs::path(opt.out_dir) / "validate_report.txt");
    CHECK(report.find("result: pass") != std::string::npos);
  }

  SUBCASE("cross-check scenario with every engine") {
    const auto cfgp = write_file(tmp.path, "full.json", cross_check_scenario());
    opt.out_dir = (tmp.path / "full").string();
    CHECK(cli::run_subcommand("validate", cfgp, opt) == 0);
    const auto report = slurp(fs::path(opt.out_dir) / "validate_report.txt");
    CHECK(report.find("result: pass") != std::string::npos);
    CHECK(report.find("[skip]") == std::string::npos);  // all engines applicable
  }
}

TEST_CASE("perturbing any engine makes validate exit 3") {
  TempDir tmp("cli_tmp_wiring");
  cli::RunOptions opt;
  opt.quiet = true;
  const char* engines[] = {"riccati",    "quadrature", "ode", "closed",
                           "terminal",   "montecarlo", "charfn",
                           "inversion",  "fd"};
  for (const char* engine : engines) {
    CAPTURE(engine);
    const auto cfgp =
        write_file(tmp.path, std::string("p_") + engine + ".json", cross_check_scenario(engine));
    opt.out_dir = (tmp.path / engine).string();
    CHECK(cli::run_subcommand("validate", cfgp, opt) == 3);
  }
}

TEST_CASE("identical configs and seeds give byte-identical outputs") {
  TempDir tmp("cli_tmp_determinism");
  const auto cfgp = write_file(tmp.path, "s.json", cross_check_scenario());
  cli::RunOptions opt;
  opt.quiet = true;
  for (const std::string cmd : {"expect", "simulate"}) {
    opt.out_dir = (tmp.path / (cmd + "_1")).string();
    REQUIRE(cli::run_subcommand(cmd, cfgp, opt) == 0);
    const fs::path first = opt.out_dir;
    opt.out_dir = (tmp.path / (cmd + "_2")).string();
    REQUIRE(cli::run_subcommand(cmd, cfgp, opt) == 0);
    for (const auto& entry : fs::directory_iterator(first)) {
      const auto mirror = fs::path(opt.out_dir) / entry.path().filename();
      REQUIRE(fs::exists(mirror));
      CHECK(slurp(entry.path()) == slurp(mirror));
    }
  }
}
