#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "mfgjd/jump_models.hpp"
#include "mfgjd/riccati.hpp"
#include "mfgjd/rng.hpp"

namespace mfgjd {

using InitialSampler = std::function<double(RngStream&)>;

struct SimulationSpec {
  std::size_t paths = 100000;
  double dt = 0.0;  // must satisfy dt <= T / 100
  std::uint64_t master_seed = 0;
  double truncation_cap = 1e6;
  std::vector<double> checkpoints;  // snapped to step boundaries
  std::size_t threads = 0;          // 0: hardware concurrency
};

struct PathEnsembleStats {
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> stderror;  // sample std / sqrt(N)
  std::vector<double> m2;        // sample second moment
  std::size_t paths = 0;
  std::size_t escaped = 0;
};

/// Weak-order-one simulation of the controlled process
///
///   X_{n+1} = X_n + (2 A(t_n) X_n + B(t_n)) dt + delta sqrt(dt) xi
///           + sum_{j=1..K} Z_j,   K ~ Poisson(lambda dt),  Z_j ~ jump law,
///
/// with drift coefficients interpolated at the step's left endpoint. Each
/// path draws from its own stream derived from the master seed by a
/// counter-based split, and blocks of paths are reduced in fixed index order,
/// so results are bit-identical for any thread count. Paths whose state
/// exceeds the truncation cap are dropped from the statistics and counted;
/// the run fails if more than 0.1% escape.
PathEnsembleStats simulate_controlled(const RiccatiSolution& sol,
                                      const InitialSampler& initial_sampler, double delta,
                                      double lambda, const JumpDistribution& jump,
                                      const SimulationSpec& spec);

/// (mean, standard error) at a stored checkpoint; throws if t is not one.
std::pair<double, double> estimate_expectation(const PathEnsembleStats& stats, double t);

}  // namespace mfgjd
