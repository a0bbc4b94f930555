#include "mfgjd/density.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mfgjd/detail/quadrature.hpp"
#include "mfgjd/errors.hpp"
#include "mfgjd/fft.hpp"

namespace mfgjd {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

}  // namespace

InitialCharFn delta_initial_cf(double x0) {
  return [x0](double omega) { return std::exp(kI * omega * x0); };
}

InitialCharFn gaussian_initial_cf(double mean, double sd) {
  return [mean, sd](double omega) {
    return std::exp(kI * omega * mean - 0.5 * sd * sd * omega * omega);
  };
}

double DensityGrid::mass() const {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) acc += 0.5 * (m[i] + m[i + 1]);
  return acc * dx();
}

double DensityGrid::first_moment() const {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    acc += 0.5 * (x[i] * m[i] + x[i + 1] * m[i + 1]);
  return acc * dx();
}

DensityGrid gaussian_density(double x_min, double x_max, std::size_t n, double mean, double sd) {
  if (n < 2 || !(x_max > x_min)) throw std::invalid_argument("gaussian_density: bad grid");
  if (!(sd > 0.0)) throw std::invalid_argument("gaussian_density: sd must be positive");
  DensityGrid g;
  g.x.resize(n);
  g.m.resize(n);
  const double h = (x_max - x_min) / static_cast<double>(n - 1);
  const double norm = 1.0 / (sd * std::sqrt(2.0 * M_PI));
  for (std::size_t i = 0; i < n; ++i) {
    g.x[i] = x_min + static_cast<double>(i) * h;
    const double u = (g.x[i] - mean) / sd;
    g.m[i] = norm * std::exp(-0.5 * u * u);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Explicit characteristic function

std::complex<double> char_fn(const RiccatiSolution& sol, const JumpDistribution& jump,
                             double delta, double lambda, const InitialCharFn& initial_cf,
                             double t, double omega) {
  if (!sol.complete())
    throw std::domain_error("char_fn requires a complete Riccati solution on [0, t]");
  if (!(t >= 0.0 && t <= sol.horizon() * (1.0 + 1e-12)))
    throw std::domain_error("char_fn: time outside [0, T]");
  if (omega == 0.0) return {1.0, 0.0};

  const auto B = sol.B();
  const auto I = sol.I();
  const double h = sol.dt();
  const double half_d2 = 0.5 * delta * delta;

  // Whole grid intervals below t, plus a trapezoid sliver up to t itself.
  double pos = std::min(t / h, static_cast<double>(sol.steps()));
  std::size_t i = static_cast<std::size_t>(pos);
  double frac = pos - static_cast<double>(i);
  if (frac > 1.0 - 1e-9 && i + 1 <= sol.steps()) {
    ++i;
    frac = 0.0;
  }
  const double I_t = frac < 1e-9 ? I[i] : sol.I_at(t);

  auto value = [&](double r, double b) {
    std::complex<double> v = -half_d2 * r * r + kI * b * r;
    if (lambda > 0.0) v += lambda * (jump.char_fn(r) - 1.0);
    return v;
  };
  auto integrand = [&](std::size_t j) { return value(omega * std::exp(2.0 * (I_t - I[j])), B[j]); };
  std::complex<double> exponent = detail::integrate_nodes(i + 1, h, integrand);
  if (frac >= 1e-9)
    exponent += 0.5 * (frac * h) * (integrand(i) + value(omega, sol.B_at(t)));
  return initial_cf(omega * std::exp(2.0 * I_t)) * std::exp(exponent);
}

CharFnGrid char_fn_grid(const RiccatiSolution& sol, const JumpDistribution& jump, double delta,
                        double lambda, const InitialCharFn& initial_cf, double t, std::size_t n,
                        double omega_max) {
  if (n < 8 || (n & (n - 1)) != 0)
    throw std::invalid_argument("char_fn_grid: n must be a power of two, n >= 8");
  if (!(omega_max > 0.0)) throw std::invalid_argument("char_fn_grid: omega_max must be positive");
  CharFnGrid grid;
  grid.time = t;
  grid.omega_max = omega_max;
  grid.omega.resize(n);
  grid.phi.resize(n);
  const double dw = 2.0 * omega_max / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) {
    grid.omega[j] = (static_cast<double>(j) - static_cast<double>(n) / 2.0) * dw;
    grid.phi[j] = char_fn(sol, jump, delta, lambda, initial_cf, t, grid.omega[j]);
  }
  return grid;
}

double mean_from_charfn(const RiccatiSolution& sol, const JumpDistribution& jump, double delta,
                        double lambda, const InitialCharFn& initial_cf, double t, double scale) {
  const double h = 1e-5 * (1.0 + std::abs(scale));
  auto phi = [&](double w) { return char_fn(sol, jump, delta, lambda, initial_cf, t, w); };
  const std::complex<double> fd =
      (-phi(2.0 * h) + 8.0 * phi(h) - 8.0 * phi(-h) + phi(-2.0 * h)) / (12.0 * h);
  return (-kI * fd).real();
}

// ---------------------------------------------------------------------------
// Transform inversion

DensityGrid density_invert(const CharFnGrid& cf) {
  const std::size_t n = cf.phi.size();
  if (n < 8 || (n & (n - 1)) != 0)
    throw std::invalid_argument("density_invert: grid length must be a power of two, >= 8");
  if (n % 4 != 0) throw std::invalid_argument("density_invert: grid length must be divisible by 4");

  const double edge = std::max(std::abs(cf.phi.front()), std::abs(cf.phi.back()));
  if (edge > 1e-10)
    throw AliasingError(edge, "density_invert: characteristic function has not decayed at the "
                              "frequency-grid edges (|phi| = " +
                                  std::to_string(edge) + ")");

  const double dw = 2.0 * cf.omega_max / static_cast<double>(n);
  const double dx = M_PI / cf.omega_max;  // dx * dw = 2 pi / N

  // m(x_k) = (dw / 2 pi) sum_j e^{-i w_j x_k} phi_j with centred grids reduces
  // to a plain forward transform after alternating-sign modulation on both
  // sides (valid for N divisible by 4).
  std::vector<std::complex<double>> work(n);
  for (std::size_t j = 0; j < n; ++j) work[j] = (j % 2 == 0 ? 1.0 : -1.0) * cf.phi[j];
  fft(work);

  DensityGrid out;
  out.time = cf.time;
  out.x.resize(n);
  out.m.resize(n);
  const double scale = dw / (2.0 * M_PI);
  for (std::size_t k = 0; k < n; ++k) {
    out.x[k] = (static_cast<double>(k) - static_cast<double>(n) / 2.0) * dx;
    out.m[k] = scale * ((k % 2 == 0 ? 1.0 : -1.0) * work[k]).real();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Finite-difference forward solver

DensityGrid DensityEvolution::slice_at(double t) const {
  if (times.empty()) throw std::logic_error("empty density evolution");
  const double h = times.size() > 1 ? times[1] - times[0] : 1.0;
  const std::size_t i = std::min(
      static_cast<std::size_t>(std::llround(std::max(0.0, t - times.front()) / h)),
      times.size() - 1);
  return DensityGrid{times[i], x, m[i]};
}

namespace {

// Discrete jump kernel on the spatial grid: either atom shifts (location in
// units of dx split between neighbouring offsets) or a quadrature of the
// density, renormalized so that the exchange conserves mass exactly.
struct JumpKernel {
  // offset (in grid indices, possibly negative) -> weight; fractional atom
  // positions are split linearly between the two neighbouring offsets.
  std::vector<std::pair<long, double>> taps;

  void apply_gain(const std::vector<double>& m, std::vector<double>& gain) const {
    const long n = static_cast<long>(m.size());
    std::fill(gain.begin(), gain.end(), 0.0);
    for (const auto& [off, wgt] : taps) {
      for (long i = 0; i < n; ++i) {
        const long src = i - off;
        if (src >= 0 && src < n) gain[static_cast<std::size_t>(i)] += wgt * m[src];
      }
    }
  }
};

JumpKernel build_jump_kernel(const JumpDistribution& jump, double dx) {
  JumpKernel kernel;
  if (jump.is_atomic()) {
    for (const auto& [z, w] : jump.atoms()) {
      const double pos = z / dx;
      const double lo = std::floor(pos);
      const double frac = pos - lo;
      if (frac < 1e-12) {
        kernel.taps.emplace_back(static_cast<long>(lo), w);
      } else {
        kernel.taps.emplace_back(static_cast<long>(lo), w * (1.0 - frac));
        kernel.taps.emplace_back(static_cast<long>(lo) + 1, w * frac);
      }
    }
    return kernel;
  }
  const auto [z_lo, z_hi] = jump.support_hint(1e-12);
  const long l_lo = static_cast<long>(std::floor(z_lo / dx)) - 1;
  const long l_hi = static_cast<long>(std::ceil(z_hi / dx)) + 1;
  double total = 0.0;
  std::vector<std::pair<long, double>> taps;
  for (long l = l_lo; l <= l_hi; ++l) {
    double w = jump.pdf(static_cast<double>(l) * dx) * dx;
    if (l == l_lo || l == l_hi) w *= 0.5;
    if (w > 0.0) {
      taps.emplace_back(l, w);
      total += w;
    }
  }
  if (!(total > 0.0)) throw std::invalid_argument("jump kernel: law has no mass on the grid");
  for (auto& [l, w] : taps) w /= total;
  kernel.taps = std::move(taps);
  return kernel;
}

// Thomas solve of (I - mu D2) v = rhs with homogeneous Dirichlet ends. The
// matrix is constant per run, so the forward-elimination factors are cached.
class ImplicitDiffusion {
 public:
  ImplicitDiffusion(std::size_t n, double mu) : n_(n), mu_(mu), cp_(n, 0.0) {
    if (mu_ <= 0.0) return;
    const double diag = 1.0 + 2.0 * mu_;
    cp_[1] = -mu_ / diag;
    for (std::size_t i = 2; i + 1 < n_; ++i) cp_[i] = -mu_ / (diag + mu_ * cp_[i - 1]);
  }

  void solve(std::vector<double>& v) const {
    if (mu_ <= 0.0) return;
    const double diag = 1.0 + 2.0 * mu_;
    v[0] = 0.0;
    v[n_ - 1] = 0.0;
    static thread_local std::vector<double> d;
    d.assign(n_, 0.0);
    d[1] = v[1] / diag;
    for (std::size_t i = 2; i + 1 < n_; ++i)
      d[i] = (v[i] + mu_ * d[i - 1]) / (diag + mu_ * cp_[i - 1]);
    v[n_ - 2] = d[n_ - 2];
    for (std::size_t i = n_ - 2; i-- > 1;) v[i] = d[i] - cp_[i] * v[i + 1];
  }

 private:
  std::size_t n_;
  double mu_;
  std::vector<double> cp_;
};

}  // namespace

DensityEvolution kffp_fd_solve(const RiccatiSolution& sol, const DensityGrid& m0, double delta,
                               double lambda, const JumpDistribution& jump,
                               std::size_t time_steps) {
  if (!sol.complete())
    throw std::domain_error("kffp_fd_solve requires a complete Riccati solution");
  if (time_steps < 1) throw std::invalid_argument("kffp_fd_solve: need at least one time step");
  const std::size_t nx = m0.x.size();
  if (nx < 8) throw std::invalid_argument("kffp_fd_solve: spatial grid too small");

  const double T = sol.horizon();
  const double dt = T / static_cast<double>(time_steps);
  const double dx = m0.dx();
  const double x_min = m0.x.front();
  const double x_max = m0.x.back();

  // Stability pre-checks. The transport bound uses the largest |drift| over
  // the run; the explicit jump exchange needs lambda dt bounded away from 1.
  double a_max = 0.0, b_max = 0.0;
  for (std::size_t i = 0; i <= sol.steps(); ++i) {
    a_max = std::max(a_max, std::abs(sol.A()[i]));
    b_max = std::max(b_max, std::abs(sol.B()[i]));
  }
  const double v_max = 2.0 * a_max * std::max(std::abs(x_min), std::abs(x_max)) + b_max;
  if (v_max * dt > dx)
    throw CflError(dx / v_max, "kffp_fd_solve: transport step unstable; admissible dt = " +
                                   std::to_string(dx / v_max));
  if (lambda * dt > 0.5)
    throw CflError(0.5 / lambda, "kffp_fd_solve: jump exchange step too large; admissible dt = " +
                                     std::to_string(0.5 / lambda));

  JumpKernel kernel;
  if (lambda > 0.0) kernel = build_jump_kernel(jump, dx);
  const ImplicitDiffusion diffusion(nx, 0.5 * delta * delta * dt / (dx * dx));

  DensityEvolution evo;
  evo.x = m0.x;
  evo.times.resize(time_steps + 1);
  evo.m.reserve(time_steps + 1);
  evo.m.push_back(m0.m);
  evo.times[0] = 0.0;

  const double mass0 = m0.mass();
  std::vector<double> cur = m0.m;
  std::vector<double> flux(nx + 1, 0.0);
  std::vector<double> gain(nx, 0.0);

  for (std::size_t step = 0; step < time_steps; ++step) {
    const double t_mid = (static_cast<double>(step) + 0.5) * dt;
    const double A = sol.A_at(std::min(t_mid, T));
    const double B = sol.B_at(std::min(t_mid, T));

    // Conservative upwind transport: flux through each interface from the
    // upwind cell; the 2A m reaction term is inside the divergence.
    flux[0] = 0.0;
    flux[nx] = 0.0;
    for (std::size_t i = 1; i < nx; ++i) {
      const double xf = x_min + (static_cast<double>(i) - 0.5) * dx;
      const double v = 2.0 * A * xf + B;
      flux[i] = v * (v >= 0.0 ? cur[i - 1] : cur[i]);
    }
    for (std::size_t i = 0; i < nx; ++i) cur[i] -= dt / dx * (flux[i + 1] - flux[i]);

    if (lambda > 0.0) {
      kernel.apply_gain(cur, gain);
      for (std::size_t i = 0; i < nx; ++i) cur[i] += lambda * dt * (gain[i] - cur[i]);
    }

    diffusion.solve(cur);
    cur.front() = 0.0;
    cur.back() = 0.0;

    evo.m.push_back(cur);
    evo.times[step + 1] = (step + 1 == time_steps) ? T : (static_cast<double>(step + 1) * dt);

    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < nx; ++i) mass += 0.5 * (cur[i] + cur[i + 1]);
    mass *= dx;
    if (std::abs(mass - mass0) > 1e-3)
      throw std::runtime_error("kffp_fd_solve: mass leak exceeded 1e-3 at t = " +
                               std::to_string(evo.times[step + 1]) +
                               " (widen the spatial domain)");
  }
  return evo;
}

}  // namespace mfgjd
