#include "mfgjd/jump_models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfgjd {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

bool is_one_sided(const JumpDistribution& d) {
  // One-sided means: support contained in [0, inf).
  if (d.is_atomic()) {
    for (const auto& [z, w] : d.atoms())
      if (z < 0.0) return false;
    return true;
  }
  return d.support_hint(1e-15).first >= -1e-300;
}

}  // namespace

JumpDistribution JumpDistribution::degenerate(double size) {
  if (!std::isfinite(size)) throw std::invalid_argument("degenerate jump: size must be finite");
  return JumpDistribution(Degenerate{size});
}

JumpDistribution JumpDistribution::one_sided_exponential(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate))
    throw std::invalid_argument("one-sided exponential jump: rate must be > 0");
  return JumpDistribution(OneSidedExp{rate});
}

JumpDistribution JumpDistribution::symmetrized(const JumpDistribution& base) {
  if (std::holds_alternative<Symmetrized>(base.law_))
    throw std::invalid_argument("symmetrized jump: base must itself be one-sided");
  if (!is_one_sided(base))
    throw std::invalid_argument("symmetrized jump: base has mass on z < 0");
  return JumpDistribution(Symmetrized{std::make_shared<JumpDistribution>(base)});
}

JumpDistribution JumpDistribution::tabulated(std::vector<double> z, std::vector<double> density) {
  if (z.size() < 2 || z.size() != density.size())
    throw std::invalid_argument("tabulated jump: need matching z/density arrays of length >= 2");
  for (std::size_t i = 0; i + 1 < z.size(); ++i)
    if (!(z[i] < z[i + 1]))
      throw std::invalid_argument("tabulated jump: z grid must be strictly increasing");
  double peak = 0.0;
  for (double v : density) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("tabulated jump: density values must be nonnegative and finite");
    peak = std::max(peak, v);
  }
  if (peak <= 0.0) throw std::invalid_argument("tabulated jump: density is identically zero");
  // Reject tables whose tails have not decayed: the grid is the whole support,
  // so a non-negligible edge value means the law's moments are not represented.
  if (density.front() > 1e-6 * peak || density.back() > 1e-6 * peak)
    throw std::invalid_argument(
        "tabulated jump: density has not decayed at the grid edges; widen the grid "
        "(divergent-moment guard)");

  // Trapezoidal mass, then renormalize.
  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < z.size(); ++i)
    mass += 0.5 * (density[i] + density[i + 1]) * (z[i + 1] - z[i]);
  if (!(mass > 0.0)) throw std::invalid_argument("tabulated jump: zero total mass");
  for (double& v : density) v /= mass;

  std::vector<double> cdf(z.size(), 0.0);
  for (std::size_t i = 0; i + 1 < z.size(); ++i)
    cdf[i + 1] = cdf[i] + 0.5 * (density[i] + density[i + 1]) * (z[i + 1] - z[i]);
  cdf.back() = 1.0;
  return JumpDistribution(Tabulated{std::move(z), std::move(density), std::move(cdf)});
}

double JumpDistribution::mean() const {
  struct Visitor {
    double operator()(const Degenerate& d) const { return d.size; }
    double operator()(const OneSidedExp& d) const { return 1.0 / d.rate; }
    double operator()(const Symmetrized&) const { return 0.0; }
    double operator()(const Tabulated& d) const {
      double m = 0.0;
      for (std::size_t i = 0; i + 1 < d.z.size(); ++i)
        m += 0.5 * (d.z[i] * d.p[i] + d.z[i + 1] * d.p[i + 1]) * (d.z[i + 1] - d.z[i]);
      return m;
    }
  };
  return std::visit(Visitor{}, law_);
}

double JumpDistribution::second_moment() const {
  struct Visitor {
    double operator()(const Degenerate& d) const { return d.size * d.size; }
    double operator()(const OneSidedExp& d) const { return 2.0 / (d.rate * d.rate); }
    double operator()(const Symmetrized& d) const { return d.base->second_moment(); }
    double operator()(const Tabulated& d) const {
      double m = 0.0;
      for (std::size_t i = 0; i + 1 < d.z.size(); ++i)
        m += 0.5 * (d.z[i] * d.z[i] * d.p[i] + d.z[i + 1] * d.z[i + 1] * d.p[i + 1]) *
             (d.z[i + 1] - d.z[i]);
      return m;
    }
  };
  return std::visit(Visitor{}, law_);
}

std::complex<double> JumpDistribution::char_fn(double omega) const {
  struct Visitor {
    double omega;
    std::complex<double> operator()(const Degenerate& d) const {
      return std::exp(kI * omega * d.size);
    }
    std::complex<double> operator()(const OneSidedExp& d) const {
      return d.rate / std::complex<double>(d.rate, -omega);
    }
    std::complex<double> operator()(const Symmetrized& d) const {
      // (p_hat(w) + p_hat(-w)) / 2 = Re p_hat(w) for a real base density.
      return {d.base->char_fn(omega).real(), 0.0};
    }
    std::complex<double> operator()(const Tabulated& d) const {
      std::complex<double> acc = 0.0;
      for (std::size_t i = 0; i + 1 < d.z.size(); ++i) {
        const auto f0 = std::exp(kI * omega * d.z[i]) * d.p[i];
        const auto f1 = std::exp(kI * omega * d.z[i + 1]) * d.p[i + 1];
        acc += 0.5 * (f0 + f1) * (d.z[i + 1] - d.z[i]);
      }
      return acc;
    }
  };
  return std::visit(Visitor{omega}, law_);
}

double JumpDistribution::sample(RngStream& rng) const {
  struct Visitor {
    RngStream& rng;
    double operator()(const Degenerate& d) const { return d.size; }
    double operator()(const OneSidedExp& d) const {
      return -std::log(1.0 - rng.uniform01()) / d.rate;
    }
    double operator()(const Symmetrized& d) const {
      const double magnitude = d.base->sample(rng);
      return rng.uniform01() < 0.5 ? -magnitude : magnitude;
    }
    double operator()(const Tabulated& d) const {
      // Inverse CDF: locate the cell, then solve the quadratic piece exactly
      // (the density is linear within a cell).
      const double u = rng.uniform01();
      const auto it = std::upper_bound(d.cdf.begin(), d.cdf.end(), u);
      std::size_t i = static_cast<std::size_t>(std::distance(d.cdf.begin(), it));
      if (i == 0) return d.z.front();
      if (i >= d.cdf.size()) return d.z.back();
      --i;
      const double h = d.z[i + 1] - d.z[i];
      const double slope = (d.p[i + 1] - d.p[i]) / h;
      const double rem = u - d.cdf[i];
      if (std::abs(slope) < 1e-14 * std::max(1.0, d.p[i])) {
        return d.p[i] > 0.0 ? d.z[i] + rem / d.p[i] : d.z[i];
      }
      // Solve p_i t + slope t^2 / 2 = rem for t in [0, h].
      const double disc = d.p[i] * d.p[i] + 2.0 * slope * rem;
      const double t = (-d.p[i] + std::sqrt(std::max(0.0, disc))) / slope;
      return d.z[i] + std::clamp(t, 0.0, h);
    }
  };
  return std::visit(Visitor{rng}, law_);
}

double JumpDistribution::pdf(double z) const {
  struct Visitor {
    double z;
    double operator()(const Degenerate&) const {
      throw std::domain_error("pdf undefined for an atomic jump law");
    }
    double operator()(const OneSidedExp& d) const {
      return z < 0.0 ? 0.0 : d.rate * std::exp(-d.rate * z);
    }
    double operator()(const Symmetrized& d) const { return 0.5 * d.base->pdf(std::abs(z)); }
    double operator()(const Tabulated& d) const {
      if (z <= d.z.front() || z >= d.z.back()) return 0.0;
      const auto it = std::upper_bound(d.z.begin(), d.z.end(), z);
      const std::size_t i = static_cast<std::size_t>(std::distance(d.z.begin(), it)) - 1;
      const double f = (z - d.z[i]) / (d.z[i + 1] - d.z[i]);
      return (1.0 - f) * d.p[i] + f * d.p[i + 1];
    }
  };
  return std::visit(Visitor{z}, law_);
}

bool JumpDistribution::is_atomic() const {
  if (std::holds_alternative<Degenerate>(law_)) return true;
  if (const auto* s = std::get_if<Symmetrized>(&law_)) return s->base->is_atomic();
  return false;
}

std::vector<std::pair<double, double>> JumpDistribution::atoms() const {
  if (const auto* d = std::get_if<Degenerate>(&law_)) return {{d->size, 1.0}};
  if (const auto* s = std::get_if<Symmetrized>(&law_)) {
    std::vector<std::pair<double, double>> out;
    for (const auto& [z, w] : s->base->atoms()) {
      out.emplace_back(-z, 0.5 * w);
      out.emplace_back(z, 0.5 * w);
    }
    return out;
  }
  throw std::domain_error("atoms() requires an atomic jump law");
}

std::pair<double, double> JumpDistribution::support_hint(double tail_mass) const {
  struct Visitor {
    double tail;
    std::pair<double, double> operator()(const Degenerate& d) const { return {d.size, d.size}; }
    std::pair<double, double> operator()(const OneSidedExp& d) const {
      return {0.0, -std::log(tail) / d.rate};
    }
    std::pair<double, double> operator()(const Symmetrized& d) const {
      const double hi = d.base->support_hint(tail).second;
      return {-hi, hi};
    }
    std::pair<double, double> operator()(const Tabulated& d) const {
      return {d.z.front(), d.z.back()};
    }
  };
  return std::visit(Visitor{tail_mass}, law_);
}

std::string JumpDistribution::kind_name() const {
  struct Visitor {
    std::string operator()(const Degenerate&) const { return "degenerate"; }
    std::string operator()(const OneSidedExp&) const { return "exp_positive"; }
    std::string operator()(const Symmetrized& d) const {
      return "symmetrized(" + d.base->kind_name() + ")";
    }
    std::string operator()(const Tabulated&) const { return "tabulated"; }
  };
  return std::visit(Visitor{}, law_);
}

}  // namespace mfgjd
