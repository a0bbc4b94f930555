#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "mfgjd/jump_models.hpp"
#include "mfgjd/riccati.hpp"

namespace mfgjd {

/// Characteristic function of the initial law, phi0(w) = E[exp(i w X_0)].
using InitialCharFn = std::function<std::complex<double>(double)>;

InitialCharFn delta_initial_cf(double x0 = 0.0);
InitialCharFn gaussian_initial_cf(double mean, double sd);

/// phi(t, .) sampled on a uniform frequency grid symmetric about zero:
/// omega_j = (j - N/2) * (2 omega_max / N), j = 0..N-1.
struct CharFnGrid {
  double time = 0.0;
  double omega_max = 0.0;
  std::vector<double> omega;
  std::vector<std::complex<double>> phi;
};

/// Density on a uniform spatial grid at one time slice.
struct DensityGrid {
  double time = 0.0;
  std::vector<double> x;
  std::vector<double> m;

  double dx() const { return (x.back() - x.front()) / static_cast<double>(x.size() - 1); }
  double mass() const;
  double first_moment() const;
};

DensityGrid gaussian_density(double x_min, double x_max, std::size_t n, double mean, double sd);

/// Characteristic function of the controlled process at time t:
///
///   phi(t, w) = phi0(w e^{2 R(t,0)})
///             * exp( int_0^t [ -delta^2 Rm^2 / 2 + i B(eta) Rm
///                              + lambda (p_hat(Rm) - 1) ] deta ),
///   Rm = w e^{2 R(t,eta)},  R(t,eta) = I(t) - I(eta),
///
/// under the fixed convention phi = E[exp(i w X)], p_hat = E[exp(i w Z)].
/// The exponent integral runs over the solution grid, with a trapezoid
/// sliver covering any remainder between the last node below t and t itself.
std::complex<double> char_fn(const RiccatiSolution& sol, const JumpDistribution& jump,
                             double delta, double lambda, const InitialCharFn& initial_cf,
                             double t, double omega);

CharFnGrid char_fn_grid(const RiccatiSolution& sol, const JumpDistribution& jump, double delta,
                        double lambda, const InitialCharFn& initial_cf, double t, std::size_t n,
                        double omega_max);

/// Mean extracted from the transform: -i dphi/dw at w = 0, by a fourth-order
/// central difference with step 1e-5 * (1 + |scale|).
double mean_from_charfn(const RiccatiSolution& sol, const JumpDistribution& jump, double delta,
                        double lambda, const InitialCharFn& initial_cf, double t,
                        double scale = 0.0);

/// Discrete inverse transform of a characteristic-function grid onto the
/// paired spatial grid (dx * domega = 2 pi / N). Requires N a power of two
/// and |phi| < 1e-10 at both grid edges; throws AliasingError otherwise.
DensityGrid density_invert(const CharFnGrid& cf);

/// Forward-equation finite-difference solution: all time slices of
///
///   dm/dt + d/dx( (2A x + B) m ) - delta^2/2 d2m/dx2
///         - lambda ( int m(x - z) p(z) dz - m ) = 0
///
/// by operator splitting: explicit conservative upwind transport, explicit
/// jump exchange by quadrature on the grid, implicit centred diffusion.
/// Boundaries are homogeneous Dirichlet with a mass-leak monitor (aborts at
/// 1e-3). Throws CflError naming the admissible step when the transport or
/// jump step would be unstable.
struct DensityEvolution {
  std::vector<double> x;
  std::vector<double> times;            // all step times, 0..T
  std::vector<std::vector<double>> m;   // one slice per time

  DensityGrid slice_at(double t) const;  // nearest stored slice
};

DensityEvolution kffp_fd_solve(const RiccatiSolution& sol, const DensityGrid& m0, double delta,
                               double lambda, const JumpDistribution& jump,
                               std::size_t time_steps);

}  // namespace mfgjd
