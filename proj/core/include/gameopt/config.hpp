#pragma once

#include "gameopt/dal.hpp"
#include "gameopt/integrators.hpp"
#include "gameopt/quadratic.hpp"
#include "gameopt/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gameopt {

/// Quadratic game spelled out in the config file as matrix literals.
struct QuadraticLiteral {
  std::vector<Index> partition;
  std::vector<Matrix> cost_matrices;
  std::vector<Vector> cost_offsets;  // empty = all zero
};

/// DAL toy game selection: coefficients plus the synthetic task recipe.
struct DalGameConfig {
  double alpha = 1.0;
  double lambda = 1.0;
  TaskParams task;
};

/// Exactly one of the three forms: a named fixture (example1-3p,
/// example1-2p, example2, dal), a quadratic literal, or a DAL spec.
struct GameSelector {
  std::string name;
  std::optional<QuadraticLiteral> quadratic;
  std::optional<DalGameConfig> dal;
};

/// One integrator arm of an experiment. Arms share the initial point.
struct ArmConfig {
  std::string label;  // defaults to "<method>-<eta>"
  IntegratorConfig integrator;
};

/// Step-size grid for cmd_sweep, either explicit or log/linear-spaced.
struct SweepConfig {
  std::vector<Method> methods;
  std::vector<double> etas;
  long max_iters = 200000;
  double stop_grad_norm = 1e-8;
  double divergence_threshold = 1e12;
  StepParams params;  // shared per-method shape parameters for all rows
};

/// Inputs to cmd_analyze. The candidate point defaults to the origin for
/// quadratic games and to a trained point for the DAL toy (trained by the
/// `train` arm below from the experiment's shared initial point).
struct AnalysisConfig {
  std::optional<std::vector<double>> point;
  std::optional<double> tol;  // default: matched to the game's gradient mode
  double eg_eta = 0.01;       // step at which the advisory EG condition is reported
  std::optional<ArmConfig> train;
};

struct ExperimentConfig {
  GameSelector game;
  std::vector<ArmConfig> arms;
  std::optional<SweepConfig> sweep;
  AnalysisConfig analysis;
  std::uint64_t seed = 0;
  long record_every = 1;
  std::string output_prefix;                      // optional file-name prefix
  std::optional<std::vector<double>> init_point;  // shared w0 override
};

/// Parses the JSON config file. Unknown keys, malformed values, or
/// out-of-range fields throw ConfigError with the offending key in the
/// message. A missing file is a ConfigError too.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Config equivalent of `--game <name>` with no config file: the named game
/// plus defaults (no arms; default sweep grids and analysis settings are
/// filled in by the commands).
ExperimentConfig config_for_named_game(const std::string& name);

}  // namespace gameopt
