#include "mfgjd/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

namespace mfgjd {

namespace {

constexpr std::size_t kBlockSize = 4096;  // fixed, so reductions never depend on thread count

struct BlockAccumulator {
  std::vector<double> sum;    // per checkpoint
  std::vector<double> sumsq;  // per checkpoint
  std::size_t alive = 0;
  std::size_t escaped = 0;
};

}  // namespace

PathEnsembleStats simulate_controlled(const RiccatiSolution& sol,
                                      const InitialSampler& initial_sampler, double delta,
                                      double lambda, const JumpDistribution& jump,
                                      const SimulationSpec& spec) {
  if (!sol.complete())
    throw std::domain_error("simulate_controlled requires a complete Riccati solution");
  if (spec.paths < 100) throw std::invalid_argument("simulate_controlled: need at least 100 paths");
  const double T = sol.horizon();
  if (!(spec.dt > 0.0) || spec.dt > T / 100.0 + 1e-15)
    throw std::invalid_argument("simulate_controlled: dt must be positive and at most T/100");
  if (spec.checkpoints.empty())
    throw std::invalid_argument("simulate_controlled: no checkpoints requested");

  const std::size_t n_steps = static_cast<std::size_t>(std::llround(T / spec.dt));
  const double dt = T / static_cast<double>(n_steps);
  const double sqrt_dt = std::sqrt(dt);

  // Drift coefficients sampled once per step at the left endpoint.
  std::vector<double> drift_a(n_steps), drift_b(n_steps);
  for (std::size_t n = 0; n < n_steps; ++n) {
    const double t = static_cast<double>(n) * dt;
    drift_a[n] = 2.0 * sol.A_at(t);
    drift_b[n] = sol.B_at(t);
  }

  // Snap checkpoints to step boundaries.
  std::vector<std::size_t> cp_steps(spec.checkpoints.size());
  std::vector<double> cp_times(spec.checkpoints.size());
  for (std::size_t k = 0; k < spec.checkpoints.size(); ++k) {
    const double t = spec.checkpoints[k];
    if (!(t >= 0.0 && t <= T * (1.0 + 1e-12)))
      throw std::invalid_argument("simulate_controlled: checkpoint outside [0, T]");
    cp_steps[k] = std::min(static_cast<std::size_t>(std::llround(t / dt)), n_steps);
    cp_times[k] = static_cast<double>(cp_steps[k]) * dt;
  }

  const std::size_t n_cp = cp_steps.size();
  const std::size_t n_blocks = (spec.paths + kBlockSize - 1) / kBlockSize;
  std::vector<BlockAccumulator> blocks(n_blocks);

  auto run_block = [&](std::size_t block) {
    BlockAccumulator acc;
    acc.sum.assign(n_cp, 0.0);
    acc.sumsq.assign(n_cp, 0.0);
    const std::size_t first = block * kBlockSize;
    const std::size_t last = std::min(first + kBlockSize, spec.paths);
    // Checkpoint steps in increasing order with their output slots.
    std::vector<std::pair<std::size_t, std::size_t>> schedule(n_cp);
    for (std::size_t k = 0; k < n_cp; ++k) schedule[k] = {cp_steps[k], k};
    std::sort(schedule.begin(), schedule.end());
    std::vector<double> snapshot(n_cp, 0.0);

    for (std::size_t p = first; p < last; ++p) {
      RngStream rng(spec.master_seed, p);
      double x = initial_sampler(rng);
      bool escaped = false;
      std::size_t next_cp = 0;
      std::fill(snapshot.begin(), snapshot.end(), 0.0);
      while (next_cp < n_cp && schedule[next_cp].first == 0)
        snapshot[schedule[next_cp++].second] = x;
      for (std::size_t n = 0; n < n_steps && !escaped; ++n) {
        x += (drift_a[n] * x + drift_b[n]) * dt + delta * sqrt_dt * rng.normal();
        if (lambda > 0.0) {
          const std::uint64_t jumps = rng.poisson(lambda * dt);
          for (std::uint64_t j = 0; j < jumps; ++j) x += jump.sample(rng);
        }
        if (!(std::abs(x) <= spec.truncation_cap)) {
          escaped = true;
          break;
        }
        while (next_cp < n_cp && schedule[next_cp].first == n + 1)
          snapshot[schedule[next_cp++].second] = x;
      }
      if (escaped) {
        ++acc.escaped;
        continue;
      }
      ++acc.alive;
      for (std::size_t k = 0; k < n_cp; ++k) {
        acc.sum[k] += snapshot[k];
        acc.sumsq[k] += snapshot[k] * snapshot[k];
      }
    }
    blocks[block] = std::move(acc);
  };

  std::size_t n_threads = spec.threads ? spec.threads : std::thread::hardware_concurrency();
  n_threads = std::max<std::size_t>(1, std::min(n_threads, n_blocks));
  if (n_threads == 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) run_block(b);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t i = 0; i < n_threads; ++i)
      pool.emplace_back([&] {
        for (std::size_t b = next.fetch_add(1); b < n_blocks; b = next.fetch_add(1)) run_block(b);
      });
    for (auto& th : pool) th.join();
  }

  // Deterministic reduction in block order.
  std::vector<double> sum(n_cp, 0.0), sumsq(n_cp, 0.0);
  std::size_t alive = 0, escaped = 0;
  for (const auto& acc : blocks) {
    for (std::size_t k = 0; k < n_cp; ++k) {
      sum[k] += acc.sum[k];
      sumsq[k] += acc.sumsq[k];
    }
    alive += acc.alive;
    escaped += acc.escaped;
  }

  if (static_cast<double>(escaped) > 1e-3 * static_cast<double>(spec.paths))
    throw std::runtime_error("simulate_controlled: " + std::to_string(escaped) +
                             " paths escaped the truncation cap (> 0.1%)");
  if (alive == 0) throw std::runtime_error("simulate_controlled: all paths escaped");

  PathEnsembleStats stats;
  stats.times = cp_times;
  stats.paths = spec.paths;
  stats.escaped = escaped;
  stats.mean.resize(n_cp);
  stats.stderror.resize(n_cp);
  stats.m2.resize(n_cp);
  const double n = static_cast<double>(alive);
  for (std::size_t k = 0; k < n_cp; ++k) {
    const double mean = sum[k] / n;
    stats.mean[k] = mean;
    stats.m2[k] = sumsq[k] / n;
    const double var = alive > 1 ? std::max(0.0, (sumsq[k] - n * mean * mean) / (n - 1.0)) : 0.0;
    stats.stderror[k] = std::sqrt(var / n);
  }
  return stats;
}

std::pair<double, double> estimate_expectation(const PathEnsembleStats& stats, double t) {
  for (std::size_t k = 0; k < stats.times.size(); ++k)
    if (std::abs(stats.times[k] - t) <= 1e-9 * std::max(1.0, std::abs(t)))
      return {stats.mean[k], stats.stderror[k]};
  throw std::invalid_argument("estimate_expectation: t is not a stored checkpoint");
}

}  // namespace mfgjd
