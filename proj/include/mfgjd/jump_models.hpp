#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mfgjd/rng.hpp"

namespace mfgjd {

/// A jump-size law p(z): moments, characteristic function and sampler.
///
/// Variants:
///   - degenerate(z0):            point mass at z0
///   - one_sided_exponential(k):  p(z) = k e^{-k z} on z >= 0
///   - symmetrized(base):         each side of a one-sided base weighted 1/2;
///                                mean is exactly zero
///   - tabulated(z, p):           piecewise-linear density on a strictly
///                                increasing grid, renormalized to unit mass
///                                at construction
///
/// Tabulated grids must cover the whole support: construction rejects tables
/// whose edge values exceed 1e-6 of the peak, since moments computed from a
/// truncated, non-decayed tail would silently diverge from the intended law.
///
/// The characteristic function convention is p_hat(w) = E[exp(i w Z)].
/// Immutable after construction and safe to share across threads; sampling
/// draws from an external RngStream.
class JumpDistribution {
 public:
  static JumpDistribution degenerate(double size);
  static JumpDistribution one_sided_exponential(double rate);
  static JumpDistribution symmetrized(const JumpDistribution& one_sided_base);
  static JumpDistribution tabulated(std::vector<double> z, std::vector<double> density);

  double mean() const;
  double second_moment() const;
  std::complex<double> char_fn(double omega) const;
  double sample(RngStream& rng) const;

  /// Density value at z. Zero outside the support. Not available for laws
  /// with atoms (degenerate and symmetrized-degenerate); see atoms().
  double pdf(double z) const;

  /// True when the law is purely atomic; atoms() then lists (location, weight).
  bool is_atomic() const;
  std::vector<std::pair<double, double>> atoms() const;

  /// [lo, hi] such that the mass outside is below tail_mass.
  std::pair<double, double> support_hint(double tail_mass = 1e-12) const;

  std::string kind_name() const;

 private:
  struct Degenerate {
    double size;
  };
  struct OneSidedExp {
    double rate;
  };
  struct Symmetrized {
    std::shared_ptr<const JumpDistribution> base;
  };
  struct Tabulated {
    std::vector<double> z;
    std::vector<double> p;    // renormalized density values
    std::vector<double> cdf;  // cdf at the grid nodes, cdf.back() == 1
  };

  using Law = std::variant<Degenerate, OneSidedExp, Symmetrized, Tabulated>;

  explicit JumpDistribution(Law law) : law_(std::move(law)) {}

  Law law_;
};

}  // namespace mfgjd
