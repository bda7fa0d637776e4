#include "gameopt/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <utility>

#include <Eigen/Eigenvalues>

#include "gameopt/csv.hpp"
#include "gameopt/equilibria.hpp"
#include "gameopt/report.hpp"
#include "gameopt/rng.hpp"
#include "gameopt/stability.hpp"

namespace gameopt {

namespace {

struct ResolvedGame {
  std::optional<QuadraticGame> quad;
  std::optional<DalGameConfig> dal;
  std::string label;

  bool is_dal() const { return dal.has_value(); }
};

ResolvedGame resolve_game(const GameSelector& selector) {
  ResolvedGame resolved;
  if (selector.quadratic.has_value() && selector.dal.has_value()) {
    throw ConfigError("game: give either a quadratic literal or a dal spec, not both");
  }
  if (selector.quadratic.has_value()) {
    resolved.quad = QuadraticGame(Partition(selector.quadratic->partition),
                                  selector.quadratic->cost_matrices,
                                  selector.quadratic->cost_offsets);
    resolved.label = "quadratic";
    return resolved;
  }
  if (selector.dal.has_value()) {
    resolved.dal = *selector.dal;
    resolved.label = "dal";
    return resolved;
  }
  if (selector.name.empty()) {
    throw ConfigError("no game selected (pass --game or a config with a 'game' entry)");
  }
  if (is_named_quadratic(selector.name)) {
    resolved.quad = make_named_quadratic(selector.name);
    resolved.label = selector.name;
    return resolved;
  }
  if (selector.name == "dal") {
    resolved.dal = DalGameConfig{};
    resolved.label = "dal";
    return resolved;
  }
  throw ConfigError("unknown game name '" + selector.name + "'");
}

/// Everything the commands need to evaluate the selected game.
struct GameBundle {
  GameDefinition game;
  ResolvedGame resolved;
  std::shared_ptr<const TransferTask> task;  // dal only
  DalArchitecture arch;                      // dal only
  double alpha = 1.0;                        // dal only
  double lambda = 1.0;                       // dal only
};

GameBundle build_bundle(const GameSelector& selector) {
  ResolvedGame resolved = resolve_game(selector);
  if (resolved.quad.has_value()) {
    GameBundle bundle{resolved.quad->as_game(), std::move(resolved), nullptr, {}, 1.0, 1.0};
    return bundle;
  }
  const DalGameConfig& dal = *resolved.dal;
  auto task = std::make_shared<const TransferTask>(make_task(dal.task));
  const DalArchitecture arch{};
  const DalModel model = DalModel::init(arch, dal.alpha, dal.lambda, 0);
  GameBundle bundle{make_dal_game(model, *task), std::move(resolved), task, arch, dal.alpha,
                    dal.lambda};
  return bundle;
}

std::uint64_t effective_seed(const ExperimentConfig& config, const RunContext& ctx) {
  return ctx.seed_override.value_or(config.seed);
}

JointParams initial_point(const ExperimentConfig& config, const GameBundle& bundle,
                          std::uint64_t seed) {
  const Partition& partition = bundle.game.partition();
  if (config.init_point.has_value()) {
    if (static_cast<Index>(config.init_point->size()) != partition.dim()) {
      throw ConfigError("init_point length does not match the game dimension (" +
                        std::to_string(partition.dim()) + ")");
    }
    return JointParams(
        Eigen::Map<const Vector>(config.init_point->data(),
                                 static_cast<Index>(config.init_point->size())),
        partition);
  }
  if (bundle.resolved.is_dal()) {
    // Arms share one seeded init; the label keeps it distinct from other
    // derived streams of the same seed.
    const DalModel model =
        DalModel::init(bundle.arch, bundle.alpha, bundle.lambda, mix_seed(seed, 1));
    return JointParams(model.weights, partition);
  }
  return JointParams(Vector::Ones(partition.dim()), partition);
}

std::string default_label(const IntegratorConfig& integrator) {
  return std::string(to_string(integrator.method)) + "-" + format_double(integrator.eta);
}

void validate_label(const std::string& label) {
  if (label.empty()) {
    throw ConfigError("arm label must be nonempty");
  }
  for (char c : label) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    if (!ok) {
      throw ConfigError("arm label '" + label +
                        "' has characters outside [A-Za-z0-9._-]");
    }
  }
}

/// Arms with resolved labels and the experiment seed applied.
std::vector<ArmConfig> finalize_arms(std::vector<ArmConfig> arms, std::uint64_t seed) {
  std::set<std::string> seen;
  for (ArmConfig& arm : arms) {
    if (arm.label.empty()) {
      arm.label = default_label(arm.integrator);
    }
    validate_label(arm.label);
    if (!seen.insert(arm.label).second) {
      throw ConfigError("duplicate arm label '" + arm.label + "'");
    }
    arm.integrator.seed = seed;
  }
  return arms;
}

std::string join_prefix(const std::string& prefix, const std::string& base) {
  return prefix.empty() ? base : prefix + "_" + base;
}

std::filesystem::path prepare_out_dir(const RunContext& ctx) {
  if (ctx.jobs < 1) {
    throw ConfigError("--jobs must be >= 1");
  }
  std::filesystem::create_directories(ctx.out_dir);
  return ctx.out_dir;
}

void preflight_output(const std::filesystem::path& path, bool overwrite) {
  if (!overwrite && std::filesystem::exists(path)) {
    throw ConfigError("output file already exists (pass --overwrite to replace): " +
                      path.string());
  }
}

void parallel_for(int jobs, std::size_t n, const std::function<void(std::size_t)>& body) {
  if (n == 0) return;
  const int workers = std::max(1, std::min(jobs, static_cast<int>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  const auto work = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) pool.emplace_back(work);
  for (std::thread& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

RunOptions run_options_for(const ExperimentConfig& config, const GameBundle& bundle) {
  RunOptions options;
  options.record_every = config.record_every;
  if (bundle.resolved.is_dal()) {
    const DalArchitecture arch = bundle.arch;
    const double alpha = bundle.alpha;
    const double lambda = bundle.lambda;
    const auto task = bundle.task;
    options.metrics = [arch, alpha, lambda, task](const JointParams& p) {
      const DalModel m{arch, alpha, lambda, p.values()};
      return std::vector<double>{source_accuracy(m, *task), transfer_accuracy(m, *task)};
    };
  }
  return options;
}

std::vector<std::string> metric_names_for(const GameBundle& bundle) {
  if (bundle.resolved.is_dal()) {
    return {"source_acc", "target_acc"};
  }
  return {};
}

std::string format_point(const Vector& w) {
  std::string out = "[";
  for (Index i = 0; i < w.size(); ++i) {
    if (i > 0) out += ", ";
    out += format_double(w[i]);
  }
  out += "]";
  return out;
}

double certificate_tolerance(const ExperimentConfig& config, const GameBundle& bundle) {
  if (config.analysis.tol.has_value()) {
    return *config.analysis.tol;
  }
  // Certificates hinge on the field Jacobian: exact for linear games,
  // finite-difference noise otherwise.
  return bundle.game.has_field_jacobian() ? default_tolerance(GradientMode::Analytic)
                                          : default_tolerance(GradientMode::FiniteDifference);
}

ArmConfig default_train_arm() {
  ArmConfig arm;
  arm.label = "train";
  arm.integrator.method = Method::RK2;
  arm.integrator.eta = 0.05;
  arm.integrator.max_iters = 1000;
  arm.integrator.stop_grad_norm = 1e-6;
  return arm;
}

std::vector<ArmConfig> default_dal_arms() {
  std::vector<ArmConfig> arms(2);
  arms[0].integrator.method = Method::Euler;
  arms[0].integrator.eta = 0.05;
  arms[0].integrator.max_iters = 1500;
  arms[0].integrator.stop_grad_norm = 1e-6;
  arms[1] = arms[0];
  arms[1].integrator.method = Method::RK2;
  return arms;
}

SweepConfig default_sweep(const GameBundle& bundle) {
  SweepConfig sweep;
  if (bundle.resolved.is_dal()) {
    sweep.methods = {Method::Euler, Method::RK2};
    sweep.max_iters = 2000;
    sweep.stop_grad_norm = 1e-6;
    const double lo = std::log(1e-3);
    const double hi = std::log(3e-1);
    for (int k = 0; k < 8; ++k) {
      sweep.etas.push_back(std::exp(lo + (hi - lo) * static_cast<double>(k) / 7.0));
    }
    return sweep;
  }
  sweep.methods = {Method::Euler, Method::RK2, Method::RK4, Method::ExtraGradient};
  const double lo = std::log(1e-4);
  const double hi = std::log(1e-2);
  for (int k = 0; k < 25; ++k) {
    sweep.etas.push_back(std::exp(lo + (hi - lo) * static_cast<double>(k) / 24.0));
  }
  return sweep;
}

}  // namespace

void cmd_analyze(const ExperimentConfig& config, const RunContext& ctx, std::ostream& os) {
  const std::filesystem::path out_dir = prepare_out_dir(ctx);
  const std::filesystem::path report_path =
      out_dir / join_prefix(config.output_prefix, "analyze_report.txt");
  preflight_output(report_path, ctx.overwrite);

  const std::uint64_t seed = effective_seed(config, ctx);
  const GameBundle bundle = build_bundle(config.game);
  const GameDefinition& game = bundle.game;
  const Partition& partition = game.partition();

  std::ostringstream report;
  write_report_line(report, "game", bundle.resolved.label);
  write_report_line(report, "players", static_cast<long>(game.n_players()));
  write_report_line(report, "dim", static_cast<long>(partition.dim()));

  // Candidate point: explicit > trained (dal) > origin (quadratic).
  std::optional<Trajectory> training;
  ArmConfig train_arm;
  JointParams point = bundle.resolved.is_dal()
                          ? initial_point(config, bundle, seed)
                          : JointParams(Vector::Zero(partition.dim()), partition);
  if (config.analysis.point.has_value()) {
    if (static_cast<Index>(config.analysis.point->size()) != partition.dim()) {
      throw ConfigError("analysis.point length does not match the game dimension (" +
                        std::to_string(partition.dim()) + ")");
    }
    point = JointParams(
        Eigen::Map<const Vector>(config.analysis.point->data(),
                                 static_cast<Index>(config.analysis.point->size())),
        partition);
  } else if (bundle.resolved.is_dal()) {
    train_arm = config.analysis.train.value_or(default_train_arm());
    train_arm.integrator.seed = seed;
    training = run_trajectory(game, point, train_arm.integrator, RunOptions{1000000, {}});
    point = JointParams(training->final_point, partition);
  }

  if (training.has_value()) {
    write_report_line(report, "train.method", std::string(to_string(train_arm.integrator.method)));
    write_report_line(report, "train.eta", train_arm.integrator.eta);
    write_report_line(report, "train.status", std::string(to_string(training->status)));
    write_report_line(report, "train.iterations", training->iterations);
    write_report_line(report, "train.final_grad_norm", training->final_grad_norm);
  }
  if (partition.dim() <= 32) {
    write_report_line(report, "point", format_point(point.values()));
  }

  const double tol = certificate_tolerance(config, bundle);
  const NECertificate cert = certify(game, point, tol);
  write_certificate_report(report, cert, "certificate");

  bool necessary_impossible = false;
  if (bundle.resolved.quad.has_value()) {
    const QuadraticGame& quad = *bundle.resolved.quad;
    // Own-block curvature of a quadratic cost is constant, so one indefinite
    // block rules out the necessary condition everywhere, not just here.
    for (int i = 0; i < quad.n_players(); ++i) {
      const Block b = partition.block(i);
      const Matrix own = quad.cost_matrix(i).block(b.offset, b.offset, b.length, b.length);
      Eigen::SelfAdjointEigenSolver<Matrix> solver(own, Eigen::EigenvaluesOnly);
      if (solver.info() != Eigen::Success) {
        throw ConvergenceFailure("analyze: own-block eigensolve failed");
      }
      if (solver.eigenvalues().minCoeff() < -tol) {
        necessary_impossible = true;
      }
    }
    write_report_line(report, "no_point_passes_necessary", necessary_impossible);

    try {
      const Vector br = best_response(quad, point);
      const Vector diff = br - point.values();
      write_report_line(report, "best_response.gap_inf",
                        diff.size() == 0 ? 0.0 : diff.cwiseAbs().maxCoeff());
      write_report_line(report, "best_response.fixed_point",
                        br_fixed_point_check(quad, point, tol));
    } catch (const SingularBlock&) {
      write_report_line(report, "best_response.available", false);
      write_report_line(report, "best_response.note",
                        std::string("an own-block matrix is not positive definite"));
    }
  }

  const GameJacobian jac = game_hessian(game, point);
  const GameClass game_class = classify_game(jac, tol);
  write_report_line(report, "game_class", std::string(to_string(game_class)));

  if (game.split().has_value()) {
    const CooperationCompetition parts = decompose_cooperation_competition(game, point);
    write_report_line(report, "decomposition.potential_norm", parts.potential_part.norm());
    write_report_line(report, "decomposition.adversarial_norm",
                      parts.adversarial_part.norm());
  }

  SpectrumReport dynamics = hurwitz_check(-jac.matrix);
  dynamics.eg_continuous = eg_continuous_condition(dynamics.eigenvalues, config.analysis.eg_eta);
  write_report_line(report, "dynamics.eg_eta", config.analysis.eg_eta);
  write_spectrum_report(report, dynamics, "dynamics");

  if (bundle.resolved.quad.has_value()) {
    if (dynamics.hurwitz_stable) {
      const Matrix& M = bundle.resolved.quad->field_matrix();
      write_report_line(report, "threshold.euler_closed_form",
                        euler_exact_threshold(dynamics.eigenvalues));
      write_report_line(report, "threshold.euler",
                        exact_stability_threshold(M, Method::Euler));
      write_report_line(report, "threshold.rk2", exact_stability_threshold(M, Method::RK2));
      write_report_line(report, "threshold.rk4", exact_stability_threshold(M, Method::RK4));
      write_report_line(report, "threshold.eg",
                        exact_stability_threshold(M, Method::ExtraGradient));
      StepParams nm_params;
      write_report_line(report, "threshold.nm.mu", nm_params.mu);
      write_report_line(report, "threshold.nm",
                        exact_stability_threshold(M, Method::Nesterov, nm_params));
    } else {
      write_report_line(report, "threshold.note",
                        std::string("skipped: dynamics are not Hurwitz stable"));
    }
  }

  std::ofstream out = open_output_file(report_path, /*overwrite=*/true);
  out << report.str();
  if (!out) {
    throw ConfigError("write failed on " + report_path.string());
  }

  os << "analyze: game=" << bundle.resolved.label << " class=" << to_string(game_class)
     << " necessary=" << (cert.necessary_holds ? "true" : "false")
     << " sufficient=" << (cert.sufficient_holds ? "true" : "false")
     << " strict=" << (cert.strict_holds ? "true" : "false");
  if (necessary_impossible) {
    os << " no_point_passes_necessary=true";
  }
  os << " report=" << report_path.string() << "\n";
}

void cmd_run(const ExperimentConfig& config, const RunContext& ctx, std::ostream& os) {
  if (config.arms.empty()) {
    throw ConfigError("run: the config has no arms (add an 'arms' array)");
  }
  const std::filesystem::path out_dir = prepare_out_dir(ctx);
  const std::uint64_t seed = effective_seed(config, ctx);
  const GameBundle bundle = build_bundle(config.game);
  const std::vector<ArmConfig> arms = finalize_arms(config.arms, seed);

  std::vector<std::filesystem::path> paths;
  paths.reserve(arms.size());
  for (const ArmConfig& arm : arms) {
    paths.push_back(out_dir /
                    join_prefix(config.output_prefix, arm.label + "_trajectory.csv"));
    preflight_output(paths.back(), ctx.overwrite);
  }

  const JointParams w0 = initial_point(config, bundle, seed);
  const RunOptions options = run_options_for(config, bundle);
  const std::vector<std::string> metric_names = metric_names_for(bundle);

  std::vector<Trajectory> results(arms.size());
  parallel_for(ctx.jobs, arms.size(), [&](std::size_t i) {
    results[i] = run_trajectory(bundle.game, w0, arms[i].integrator, options);
  });

  for (std::size_t i = 0; i < arms.size(); ++i) {
    write_trajectory_csv(paths[i], results[i], bundle.game.n_players(), metric_names,
                         /*overwrite=*/true);
    os << "arm " << arms[i].label << ": method=" << to_string(arms[i].integrator.method)
       << " eta=" << format_double(arms[i].integrator.eta)
       << " status=" << to_string(results[i].status)
       << " iterations=" << results[i].iterations
       << " final_grad_norm=" << format_double(results[i].final_grad_norm)
       << " field_evaluations=" << results[i].field_evaluations
       << " file=" << paths[i].string() << "\n";
  }
}

void cmd_sweep(const ExperimentConfig& config, const RunContext& ctx, std::ostream& os) {
  const std::filesystem::path out_dir = prepare_out_dir(ctx);
  const std::filesystem::path sweep_path =
      out_dir / join_prefix(config.output_prefix, "sweep.csv");
  preflight_output(sweep_path, ctx.overwrite);

  const std::uint64_t seed = effective_seed(config, ctx);
  const GameBundle bundle = build_bundle(config.game);
  const SweepConfig sweep = config.sweep.has_value() ? *config.sweep : default_sweep(bundle);
  const bool linear_field = bundle.resolved.quad.has_value();

  struct Row {
    Method method;
    double eta;
  };
  std::vector<Row> rows;
  rows.reserve(sweep.methods.size() * sweep.etas.size());
  for (Method method : sweep.methods) {
    for (double eta : sweep.etas) {
      rows.push_back({method, eta});
    }
  }

  const JointParams w0 = initial_point(config, bundle, seed);
  const RunOptions options = run_options_for(config, bundle);

  std::vector<Trajectory> results(rows.size());
  parallel_for(ctx.jobs, rows.size(), [&](std::size_t i) {
    IntegratorConfig integrator;
    integrator.method = rows[i].method;
    integrator.eta = rows[i].eta;
    integrator.params = sweep.params;
    integrator.max_iters = sweep.max_iters;
    integrator.stop_grad_norm = sweep.stop_grad_norm;
    integrator.divergence_threshold = sweep.divergence_threshold;
    integrator.seed = seed;
    // The sweep needs terminal state only; record nothing along the way.
    RunOptions sparse = options;
    sparse.record_every = std::max<long>(1, sweep.max_iters);
    sparse.metrics = {};
    results[i] = run_trajectory(bundle.game, w0, integrator, sparse);
  });

  std::vector<std::string> header = {"method", "eta", "terminal_status", "iters_to_converge",
                                     "final_grad_norm"};
  if (linear_field) {
    header.push_back("spectral_radius");
  }
  CsvWriter writer(sweep_path, kSweepSchema, header, /*overwrite=*/true);
  long converged = 0, maxed = 0, diverged = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Trajectory& t = results[i];
    switch (t.status) {
      case TerminalStatus::Converged: ++converged; break;
      case TerminalStatus::MaxIters: ++maxed; break;
      case TerminalStatus::Diverged: ++diverged; break;
    }
    std::vector<CsvCell> cells;
    cells.emplace_back(std::string(to_string(rows[i].method)));
    cells.emplace_back(rows[i].eta);
    cells.emplace_back(std::string(to_string(t.status)));
    if (t.status == TerminalStatus::Converged) {
      cells.emplace_back(t.iterations);
    } else {
      cells.emplace_back(std::monostate{});
    }
    cells.emplace_back(t.final_grad_norm);
    if (linear_field) {
      try {
        cells.emplace_back(discrete_stability_map(bundle.resolved.quad->field_matrix(),
                                                  rows[i].method, rows[i].eta, sweep.params)
                               .spectral_radius);
      } catch (const UnsupportedMethod&) {
        cells.emplace_back(std::monostate{});
      }
    }
    writer.write_row(cells);
  }

  os << "sweep: game=" << bundle.resolved.label << " rows=" << rows.size()
     << " converged=" << converged << " maxiters=" << maxed << " diverged=" << diverged
     << " file=" << sweep_path.string() << "\n";
}

void cmd_dal(const ExperimentConfig& config, const RunContext& ctx, std::ostream& os) {
  const std::filesystem::path out_dir = prepare_out_dir(ctx);
  const std::uint64_t seed = effective_seed(config, ctx);
  const GameBundle bundle = build_bundle(config.game);
  if (!bundle.resolved.is_dal()) {
    throw ConfigError("dal: the selected game is not the dal toy (use --game dal or a "
                      "config with a dal game)");
  }
  const std::vector<ArmConfig> arms =
      finalize_arms(config.arms.empty() ? default_dal_arms() : config.arms, seed);

  const std::filesystem::path summary_path =
      out_dir / join_prefix(config.output_prefix, "dal_summary.csv");
  preflight_output(summary_path, ctx.overwrite);
  std::vector<std::filesystem::path> paths;
  paths.reserve(arms.size());
  for (const ArmConfig& arm : arms) {
    paths.push_back(out_dir / join_prefix(config.output_prefix, arm.label + "_dal.csv"));
    preflight_output(paths.back(), ctx.overwrite);
  }

  const JointParams w0 = initial_point(config, bundle, seed);
  const RunOptions options = run_options_for(config, bundle);
  const std::vector<std::string> metric_names = metric_names_for(bundle);

  std::vector<Trajectory> results(arms.size());
  parallel_for(ctx.jobs, arms.size(), [&](std::size_t i) {
    results[i] = run_trajectory(bundle.game, w0, arms[i].integrator, options);
  });

  CsvWriter summary(summary_path, kDalSummarySchema,
                    {"label", "method", "eta", "terminal_status", "iterations",
                     "final_grad_norm", "final_source_acc", "final_target_acc",
                     "best_target_acc", "best_target_iter"},
                    /*overwrite=*/true);
  for (std::size_t i = 0; i < arms.size(); ++i) {
    const Trajectory& t = results[i];
    write_trajectory_csv(paths[i], t, bundle.game.n_players(), metric_names,
                         /*overwrite=*/true);
    double final_source = 0.0, final_target = 0.0, best_target = 0.0;
    long best_iter = 0;
    for (const TrajectoryRecord& rec : t.records) {
      if (rec.task_metrics.size() != 2) continue;
      if (rec.task_metrics[1] > best_target) {
        best_target = rec.task_metrics[1];
        best_iter = rec.iter;
      }
    }
    if (!t.records.empty() && t.records.back().task_metrics.size() == 2) {
      final_source = t.records.back().task_metrics[0];
      final_target = t.records.back().task_metrics[1];
    }
    summary.write_row({arms[i].label, std::string(to_string(arms[i].integrator.method)),
                       arms[i].integrator.eta, std::string(to_string(t.status)), t.iterations,
                       t.final_grad_norm, final_source, final_target, best_target, best_iter});
    os << "arm " << arms[i].label << ": method=" << to_string(arms[i].integrator.method)
       << " eta=" << format_double(arms[i].integrator.eta)
       << " status=" << to_string(t.status) << " iterations=" << t.iterations
       << " final_grad_norm=" << format_double(t.final_grad_norm)
       << " final_target_acc=" << format_double(final_target)
       << " best_target_acc=" << format_double(best_target) << " at_iter=" << best_iter
       << " file=" << paths[i].string() << "\n";
  }
  os << "dal: summary=" << summary_path.string() << "\n";
}

}  // namespace gameopt
