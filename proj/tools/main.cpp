// gameopt CLI: analyze / run / sweep / dal over built-in or configured games.
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "gameopt/experiment.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string game_name;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  bool overwrite = false;
};

void add_common_options(CLI::App* sub, CommonFlags& flags) {
  sub->add_option("--config", flags.config_path, "JSON experiment config file");
  sub->add_option("--game", flags.game_name,
                  "built-in game: example1-3p, example1-2p, example2, dal");
  sub->add_option("--out", flags.out_dir, "directory for output files")
      ->capture_default_str();
  sub->add_option("--seed", flags.seed, "override the experiment seed");
  sub->add_option("--jobs", flags.jobs, "worker threads for independent runs")
      ->capture_default_str();
  sub->add_flag("--overwrite", flags.overwrite, "replace existing output files");
}

gameopt::ExperimentConfig make_config(const CommonFlags& flags) {
  const bool has_config = !flags.config_path.empty();
  const bool has_game = !flags.game_name.empty();
  if (has_config == has_game) {
    throw gameopt::ConfigError("pass exactly one of --config or --game");
  }
  return has_config ? gameopt::load_config(flags.config_path)
                    : gameopt::config_for_named_game(flags.game_name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "gameopt: multi-player game dynamics toolbox (equilibrium certificates, "
      "integrator stability, step-size sweeps, adversarial-transfer toy)"};
  app.require_subcommand(1);

  CommonFlags flags;
  CLI::App* analyze = app.add_subcommand(
      "analyze", "equilibrium certificate and dynamics stability report at a point");
  CLI::App* run = app.add_subcommand(
      "run", "integrate configured arms from a shared start; one trajectory CSV per arm");
  CLI::App* sweep = app.add_subcommand(
      "sweep", "terminal status over a (method, step size) grid; one summary CSV");
  CLI::App* dal = app.add_subcommand(
      "dal", "train the adversarial-transfer toy; trajectory CSVs plus an accuracy summary");
  for (CLI::App* sub : {analyze, run, sweep, dal}) {
    add_common_options(sub, flags);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const gameopt::ExperimentConfig config = make_config(flags);
    gameopt::RunContext ctx;
    ctx.out_dir = flags.out_dir;
    ctx.seed_override = flags.seed;
    ctx.jobs = flags.jobs;
    ctx.overwrite = flags.overwrite;

    if (analyze->parsed()) {
      gameopt::cmd_analyze(config, ctx, std::cout);
    } else if (run->parsed()) {
      gameopt::cmd_run(config, ctx, std::cout);
    } else if (sweep->parsed()) {
      gameopt::cmd_sweep(config, ctx, std::cout);
    } else if (dal->parsed()) {
      gameopt::cmd_dal(config, ctx, std::cout);
    }
  } catch (const gameopt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const gameopt::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
