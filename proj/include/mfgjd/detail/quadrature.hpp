#pragma once

#include <cstddef>
#include <type_traits>
#include <vector>

namespace mfgjd::detail {

/// Cumulative integral of f sampled on a uniform grid with spacing h, zero at
/// the first node. Simpson pairs chained two nodes at a time; odd prefixes are
/// completed with the three-point open rule, so every prefix is at least
/// third-order accurate.
template <typename Vec>
std::vector<double> cumulative_integral(const Vec& f, double h) {
  const std::size_t n = f.size();
  std::vector<double> out(n, 0.0);
  if (n < 3) {
    for (std::size_t i = 1; i < n; ++i) out[i] = out[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
    return out;
  }
  out[1] = h * (5.0 * f[0] + 8.0 * f[1] - f[2]) / 12.0;
  for (std::size_t i = 2; i < n; ++i)
    out[i] = out[i - 2] + h * (f[i - 2] + 4.0 * f[i - 1] + f[i]) / 3.0;
  return out;
}

/// Composite integral over the whole uniform grid (last entry of the
/// cumulative rule, without materialising the prefix array). Works for real
/// and complex integrands.
template <typename F>
auto integrate_nodes(std::size_t n_nodes, double h, F&& value_at) {
  using R = std::decay_t<decltype(value_at(std::size_t{0}))>;
  if (n_nodes < 2) return R{};
  if (n_nodes == 2) return R(0.5 * h * (value_at(0) + value_at(1)));
  R acc{};
  std::size_t start = 0;
  if ((n_nodes - 1) % 2 == 1) {  // odd interval count: open rule on the first interval
    acc += h * (5.0 * value_at(0) + 8.0 * value_at(1) - value_at(2)) / 12.0;
    start = 1;
  }
  for (std::size_t i = start; i + 2 < n_nodes; i += 2)
    acc += h * (value_at(i) + 4.0 * value_at(i + 1) + value_at(i + 2)) / 3.0;
  return acc;
}

}  // namespace mfgjd::detail
