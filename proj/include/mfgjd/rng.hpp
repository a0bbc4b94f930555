#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mfgjd {

/// SplitMix64 finalizer. Used to derive independent per-stream seeds from a
/// master seed and a stream index, so that parallel and serial runs consume
/// identical randomness per path.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic randomness stream. All conversions from raw 64-bit output
/// (uniform, normal, Poisson) are implemented here rather than taken from
/// <random> distributions, whose output sequences are not pinned by the
/// standard; results are therefore reproducible across toolchains.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
      : engine_(splitmix64(master_seed + 0x9e3779b97f4a7c15ULL * (stream_index + 1))) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // in (0, 1], keeps log finite
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Poisson count by Knuth's product-of-uniforms method. Intended for the
  /// small per-step means that arise here (cost grows linearly in the mean).
  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    const double threshold = std::exp(-mean);
    std::uint64_t count = 0;
    double product = uniform01();
    while (product > threshold) {
      ++count;
      product *= uniform01();
    }
    return count;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mfgjd
