#include "gameopt/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <string>

#include "json.hpp"

namespace gameopt {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) { throw ConfigError("config: " + message); }

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      fail("unknown key '" + it.key() + "' in " + where);
    }
  }
}

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double as_double(const json& v, const std::string& key) {
  if (!v.is_number()) fail("'" + key + "' must be a number");
  return v.get<double>();
}

double as_finite_double(const json& v, const std::string& key) {
  const double x = as_double(v, key);
  if (!std::isfinite(x)) fail("'" + key + "' must be finite");
  return x;
}

long as_long(const json& v, const std::string& key) {
  if (!v.is_number_integer()) fail("'" + key + "' must be an integer");
  return v.get<long>();
}

std::uint64_t as_seed(const json& v, const std::string& key) {
  if (!(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0))) {
    fail("'" + key + "' must be a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) fail("'" + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> as_double_array(const json& v, const std::string& key) {
  if (!v.is_array()) fail("'" + key + "' must be an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) {
    out.push_back(as_finite_double(x, key));
  }
  return out;
}

Matrix as_matrix(const json& v, const std::string& key) {
  if (!v.is_array() || v.empty()) fail("'" + key + "' must be a nonempty array of rows");
  const auto rows = static_cast<Index>(v.size());
  Index cols = -1;
  Matrix m;
  for (Index i = 0; i < rows; ++i) {
    const auto row = as_double_array(v[static_cast<std::size_t>(i)], key);
    if (cols < 0) {
      cols = static_cast<Index>(row.size());
      if (cols == 0) fail("'" + key + "' has an empty row");
      m.resize(rows, cols);
    } else if (static_cast<Index>(row.size()) != cols) {
      fail("'" + key + "' rows have inconsistent lengths");
    }
    for (Index j = 0; j < cols; ++j) {
      m(i, j) = row[static_cast<std::size_t>(j)];
    }
  }
  return m;
}

void parse_step_params(const json& j, const std::string& where, StepParams& params) {
  if (const json* v = find(j, "rk_alpha")) params.rk_alpha = as_finite_double(*v, where + ".rk_alpha");
  if (const json* v = find(j, "mu")) params.mu = as_finite_double(*v, where + ".mu");
  if (const json* v = find(j, "gamma")) params.gamma = as_finite_double(*v, where + ".gamma");
  if (const json* v = find(j, "beta1")) params.beta1 = as_finite_double(*v, where + ".beta1");
  if (const json* v = find(j, "beta2")) params.beta2 = as_finite_double(*v, where + ".beta2");
  if (const json* v = find(j, "eps_adam")) params.eps_adam = as_finite_double(*v, where + ".eps_adam");
}

ArmConfig parse_arm(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where + " must be an object");
  check_keys(j, where,
             {"label", "method", "eta", "max_iters", "stop_grad_norm", "divergence_threshold",
              "rk_alpha", "mu", "gamma", "beta1", "beta2", "eps_adam"});
  ArmConfig arm;
  const json* method = find(j, "method");
  if (method == nullptr) fail(where + " is missing 'method'");
  arm.integrator.method = parse_method(as_string(*method, where + ".method"));
  const json* eta = find(j, "eta");
  if (eta == nullptr) fail(where + " is missing 'eta'");
  arm.integrator.eta = as_finite_double(*eta, where + ".eta");
  if (const json* v = find(j, "label")) arm.label = as_string(*v, where + ".label");
  if (const json* v = find(j, "max_iters")) {
    arm.integrator.max_iters = as_long(*v, where + ".max_iters");
  }
  if (const json* v = find(j, "stop_grad_norm")) {
    arm.integrator.stop_grad_norm = as_finite_double(*v, where + ".stop_grad_norm");
  }
  if (const json* v = find(j, "divergence_threshold")) {
    arm.integrator.divergence_threshold = as_finite_double(*v, where + ".divergence_threshold");
  }
  parse_step_params(j, where, arm.integrator.params);
  try {
    arm.integrator.validate();
  } catch (const ConfigError& e) {
    fail(where + ": " + e.what());
  }
  return arm;
}

SweepConfig parse_sweep(const json& j) {
  if (!j.is_object()) fail("'sweep' must be an object");
  check_keys(j, "sweep",
             {"methods", "etas", "eta_grid", "max_iters", "stop_grad_norm",
              "divergence_threshold", "rk_alpha", "mu", "gamma", "beta1", "beta2", "eps_adam"});
  SweepConfig sweep;
  const json* methods = find(j, "methods");
  if (methods == nullptr || !methods->is_array() || methods->empty()) {
    fail("'sweep.methods' must be a nonempty array of method names");
  }
  for (const auto& m : *methods) {
    sweep.methods.push_back(parse_method(as_string(m, "sweep.methods")));
  }

  const json* etas = find(j, "etas");
  const json* grid = find(j, "eta_grid");
  if ((etas != nullptr) == (grid != nullptr)) {
    fail("'sweep' needs exactly one of 'etas' or 'eta_grid'");
  }
  if (etas != nullptr) {
    sweep.etas = as_double_array(*etas, "sweep.etas");
  } else {
    check_keys(*grid, "sweep.eta_grid", {"min", "max", "count", "spacing"});
    const json* minv = find(*grid, "min");
    const json* maxv = find(*grid, "max");
    const json* countv = find(*grid, "count");
    if (minv == nullptr || maxv == nullptr || countv == nullptr) {
      fail("'sweep.eta_grid' needs 'min', 'max', and 'count'");
    }
    const double lo = as_finite_double(*minv, "sweep.eta_grid.min");
    const double hi = as_finite_double(*maxv, "sweep.eta_grid.max");
    const long count = as_long(*countv, "sweep.eta_grid.count");
    std::string spacing = "log";
    if (const json* v = find(*grid, "spacing")) spacing = as_string(*v, "sweep.eta_grid.spacing");
    if (count < 1) fail("'sweep.eta_grid.count' must be >= 1");
    if (!(lo <= hi)) fail("'sweep.eta_grid' needs min <= max");
    if (spacing == "log") {
      if (!(lo > 0.0)) fail("'sweep.eta_grid' log spacing needs min > 0");
      for (long k = 0; k < count; ++k) {
        const double frac = count == 1 ? 0.0
                                       : static_cast<double>(k) / static_cast<double>(count - 1);
        sweep.etas.push_back(std::exp(std::log(lo) + frac * (std::log(hi) - std::log(lo))));
      }
    } else if (spacing == "linear") {
      for (long k = 0; k < count; ++k) {
        const double frac = count == 1 ? 0.0
                                       : static_cast<double>(k) / static_cast<double>(count - 1);
        sweep.etas.push_back(lo + frac * (hi - lo));
      }
    } else {
      fail("'sweep.eta_grid.spacing' must be \"log\" or \"linear\"");
    }
  }
  for (double eta : sweep.etas) {
    if (!(eta > 0.0)) fail("'sweep' step sizes must be positive");
  }

  if (const json* v = find(j, "max_iters")) sweep.max_iters = as_long(*v, "sweep.max_iters");
  if (sweep.max_iters < 0) fail("'sweep.max_iters' must be >= 0");
  if (const json* v = find(j, "stop_grad_norm")) {
    sweep.stop_grad_norm = as_finite_double(*v, "sweep.stop_grad_norm");
  }
  if (!(sweep.stop_grad_norm >= 0.0)) fail("'sweep.stop_grad_norm' must be >= 0");
  if (const json* v = find(j, "divergence_threshold")) {
    sweep.divergence_threshold = as_finite_double(*v, "sweep.divergence_threshold");
  }
  if (!(sweep.divergence_threshold > 0.0)) fail("'sweep.divergence_threshold' must be > 0");
  parse_step_params(j, "sweep", sweep.params);
  return sweep;
}

TaskParams parse_task(const json& j) {
  if (!j.is_object()) fail("'game.dal.task' must be an object");
  check_keys(j, "game.dal.task",
             {"n_per_domain", "n_eval_per_domain", "cluster_separation", "cluster_std",
              "target_shift", "target_rotation", "seed"});
  TaskParams task;
  if (const json* v = find(j, "n_per_domain")) {
    task.n_per_domain = as_long(*v, "game.dal.task.n_per_domain");
  }
  if (const json* v = find(j, "n_eval_per_domain")) {
    task.n_eval_per_domain = as_long(*v, "game.dal.task.n_eval_per_domain");
  }
  if (const json* v = find(j, "cluster_separation")) {
    task.cluster_separation = as_finite_double(*v, "game.dal.task.cluster_separation");
  }
  if (const json* v = find(j, "cluster_std")) {
    task.cluster_std = as_finite_double(*v, "game.dal.task.cluster_std");
  }
  if (const json* v = find(j, "target_shift")) {
    const auto shift = as_double_array(*v, "game.dal.task.target_shift");
    if (shift.size() != 2) fail("'game.dal.task.target_shift' must have two entries");
    task.target_shift_x = shift[0];
    task.target_shift_y = shift[1];
  }
  if (const json* v = find(j, "target_rotation")) {
    task.target_rotation = as_finite_double(*v, "game.dal.task.target_rotation");
  }
  if (const json* v = find(j, "seed")) task.seed = as_seed(*v, "game.dal.task.seed");
  return task;
}

DalGameConfig parse_dal(const json& j) {
  if (!j.is_object()) fail("'game.dal' must be an object");
  check_keys(j, "game.dal", {"alpha", "lambda", "task"});
  DalGameConfig dal;
  if (const json* v = find(j, "alpha")) dal.alpha = as_finite_double(*v, "game.dal.alpha");
  if (const json* v = find(j, "lambda")) dal.lambda = as_finite_double(*v, "game.dal.lambda");
  if (const json* v = find(j, "task")) dal.task = parse_task(*v);
  try {
    make_task(dal.task);  // range checks; result discarded
  } catch (const ConfigError& e) {
    fail(std::string("'game.dal.task': ") + e.what());
  }
  return dal;
}

QuadraticLiteral parse_quadratic(const json& j) {
  if (!j.is_object()) fail("'game.quadratic' must be an object");
  check_keys(j, "game.quadratic", {"partition", "cost_matrices", "cost_offsets"});
  QuadraticLiteral literal;
  const json* partition = find(j, "partition");
  if (partition == nullptr || !partition->is_array() || partition->empty()) {
    fail("'game.quadratic.partition' must be a nonempty array of block lengths");
  }
  for (const auto& len : *partition) {
    const long l = as_long(len, "game.quadratic.partition");
    if (l < 1) fail("'game.quadratic.partition' entries must be >= 1");
    literal.partition.push_back(l);
  }
  const json* matrices = find(j, "cost_matrices");
  if (matrices == nullptr || !matrices->is_array()) {
    fail("'game.quadratic.cost_matrices' must be an array of matrices");
  }
  for (const auto& m : *matrices) {
    literal.cost_matrices.push_back(as_matrix(m, "game.quadratic.cost_matrices"));
  }
  if (const json* offsets = find(j, "cost_offsets")) {
    if (!offsets->is_array()) fail("'game.quadratic.cost_offsets' must be an array of vectors");
    for (const auto& b : *offsets) {
      const auto vec = as_double_array(b, "game.quadratic.cost_offsets");
      literal.cost_offsets.push_back(
          Eigen::Map<const Vector>(vec.data(), static_cast<Index>(vec.size())));
    }
  }
  try {
    QuadraticGame check(Partition(literal.partition), literal.cost_matrices,
                        literal.cost_offsets);  // full shape/symmetry validation
  } catch (const std::exception& e) {
    fail(std::string("'game.quadratic': ") + e.what());
  }
  return literal;
}

GameSelector parse_game(const json& j) {
  GameSelector game;
  if (j.is_string()) {
    game.name = j.get<std::string>();
    if (!is_named_quadratic(game.name) && game.name != "dal") {
      fail("unknown game name '" + game.name +
           "' (expected example1-3p, example1-2p, example2, or dal)");
    }
    return game;
  }
  if (!j.is_object()) fail("'game' must be a name or an object");
  check_keys(j, "game", {"name", "quadratic", "dal"});
  const json* name = find(j, "name");
  const json* quadratic = find(j, "quadratic");
  const json* dal = find(j, "dal");
  const int forms = (name != nullptr) + (quadratic != nullptr) + (dal != nullptr);
  if (forms != 1) {
    fail("'game' needs exactly one of 'name', 'quadratic', or 'dal'");
  }
  if (name != nullptr) {
    game.name = as_string(*name, "game.name");
    if (!is_named_quadratic(game.name) && game.name != "dal") {
      fail("unknown game name '" + game.name +
           "' (expected example1-3p, example1-2p, example2, or dal)");
    }
  } else if (quadratic != nullptr) {
    game.quadratic = parse_quadratic(*quadratic);
  } else {
    game.dal = parse_dal(*dal);
  }
  return game;
}

AnalysisConfig parse_analysis(const json& j) {
  if (!j.is_object()) fail("'analysis' must be an object");
  check_keys(j, "analysis", {"point", "tol", "eg_eta", "train"});
  AnalysisConfig analysis;
  if (const json* v = find(j, "point")) {
    analysis.point = as_double_array(*v, "analysis.point");
  }
  if (const json* v = find(j, "tol")) {
    analysis.tol = as_finite_double(*v, "analysis.tol");
    if (!(*analysis.tol > 0.0)) fail("'analysis.tol' must be > 0");
  }
  if (const json* v = find(j, "eg_eta")) {
    analysis.eg_eta = as_finite_double(*v, "analysis.eg_eta");
    if (!(analysis.eg_eta > 0.0)) fail("'analysis.eg_eta' must be > 0");
  }
  if (const json* v = find(j, "train")) {
    analysis.train = parse_arm(*v, "analysis.train");
  }
  return analysis;
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("config file not found: " + path.string());
  }
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config: " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!root.is_object()) fail("top level must be an object");
  check_keys(root, "the top level",
             {"game", "arms", "sweep", "analysis", "seed", "record_every", "output_prefix",
              "init_point"});

  ExperimentConfig config;
  const json* game = find(root, "game");
  if (game == nullptr) fail("missing required key 'game'");
  config.game = parse_game(*game);

  if (const json* arms = find(root, "arms")) {
    if (!arms->is_array()) fail("'arms' must be an array");
    for (std::size_t i = 0; i < arms->size(); ++i) {
      config.arms.push_back(
          parse_arm((*arms)[i], "arms[" + std::to_string(i) + "]"));
    }
  }
  if (const json* sweep = find(root, "sweep")) {
    config.sweep = parse_sweep(*sweep);
  }
  if (const json* analysis = find(root, "analysis")) {
    config.analysis = parse_analysis(*analysis);
  }
  if (const json* seed = find(root, "seed")) {
    config.seed = as_seed(*seed, "seed");
  }
  if (const json* re = find(root, "record_every")) {
    config.record_every = as_long(*re, "record_every");
    if (config.record_every < 1) fail("'record_every' must be >= 1");
  }
  if (const json* prefix = find(root, "output_prefix")) {
    config.output_prefix = as_string(*prefix, "output_prefix");
  }
  if (const json* init = find(root, "init_point")) {
    config.init_point = as_double_array(*init, "init_point");
  }
  return config;
}

ExperimentConfig config_for_named_game(const std::string& name) {
  if (!is_named_quadratic(name) && name != "dal") {
    throw ConfigError("unknown game name '" + name +
                      "' (expected example1-3p, example1-2p, example2, or dal)");
  }
  ExperimentConfig config;
  config.game.name = name;
  return config;
}

}  // namespace gameopt
