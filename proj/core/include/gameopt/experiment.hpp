#pragma once

#include "gameopt/config.hpp"

#include <filesystem>
#include <optional>
#include <ostream>

namespace gameopt {

/// Command-independent execution context supplied by CLI flags.
struct RunContext {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed_override;
  int jobs = 1;
  bool overwrite = false;
};

/// The four commands. Each is a pure function of (config, context): writes
/// its output files under ctx.out_dir and a short summary to `os`, and
/// throws ConfigError (usage problems, existing outputs) or NumericError
/// (violated numerical contracts). Diverged runs are ordinary results, not
/// errors.

/// Stability/equilibrium report (text, key: value lines) at the analysis
/// point: certificate, game class, and for linear games the dynamics
/// spectrum, step-size bound, and exact per-method stability thresholds.
void cmd_analyze(const ExperimentConfig& config, const RunContext& ctx, std::ostream& os);

/// One trajectory CSV per arm; per-arm terminal status on `os`.
void cmd_run(const ExperimentConfig& config, const RunContext& ctx, std::ostream& os);

/// Grid of (method, eta) trajectories into one CSV; rows carry terminal
/// status, iterations to converge, final gradient norm, and (linear games)
/// the analytic spectral radius of the exact one-step map.
void cmd_sweep(const ExperimentConfig& config, const RunContext& ctx, std::ostream& os);

/// DAL training arms: per-arm trajectory CSV with accuracy columns plus a
/// summary CSV of best target accuracy per arm.
void cmd_dal(const ExperimentConfig& config, const RunContext& ctx, std::ostream& os);

}  // namespace gameopt
