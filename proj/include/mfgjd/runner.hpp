#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "mfgjd/config.hpp"

namespace mfgjd::cli {

/// Exit codes: 0 success, 1 config validation failure, 2 numerical failure
/// (blow-up where not allowed, aliasing, CFL, mass leak), 3 cross-check
/// failure in `validate`.
struct RunOptions {
  std::string out_dir;                // overrides config when nonempty
  std::optional<std::uint64_t> seed;  // overrides the Monte Carlo seed
  bool quiet = false;
};

int run_subcommand(const std::string& command, const std::string& config_path,
                   const RunOptions& options);

}  // namespace mfgjd::cli
