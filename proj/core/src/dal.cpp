#include "gameopt/dal.hpp"

#include <array>
#include <cmath>
#include <memory>
#include <numeric>
#include <utility>

#include "gameopt/rng.hpp"

namespace gameopt {

namespace {

void check_arch(const DalArchitecture& a) {
  if (a.input_dim < 1 || a.hidden_dim < 1 || a.feature_dim < 1 || a.n_classes < 2 ||
      a.domain_hidden_dim < 1) {
    throw std::invalid_argument("DalArchitecture: all layer sizes must be positive "
                                "(and n_classes >= 2)");
  }
}

void check_model(const DalModel& m) {
  check_arch(m.arch);
  if (m.weights.size() != m.arch.dim()) {
    throw std::invalid_argument("DalModel: weight vector length does not match architecture");
  }
  if (!std::isfinite(m.alpha) || !std::isfinite(m.lambda)) {
    throw std::invalid_argument("DalModel: alpha and lambda must be finite");
  }
}

void check_split(const Matrix& x, const std::vector<int>* y, Index input_dim, Index n_classes,
                 const char* name) {
  if (x.rows() < 1 || x.cols() != input_dim) {
    throw std::invalid_argument(std::string("TransferTask: ") + name +
                                " must be nonempty with input_dim columns");
  }
  if (y != nullptr) {
    if (static_cast<Index>(y->size()) != x.rows()) {
      throw std::invalid_argument(std::string("TransferTask: ") + name +
                                  " labels do not match sample count");
    }
    for (int label : *y) {
      if (label < 0 || label >= n_classes) {
        throw std::invalid_argument(std::string("TransferTask: ") + name +
                                    " has a label outside [0, n_classes)");
      }
    }
  }
}

void check_task(const TransferTask& t, const DalArchitecture& a) {
  check_split(t.source_x, &t.source_y, a.input_dim, a.n_classes, "source split");
  check_split(t.target_x, nullptr, a.input_dim, a.n_classes, "target split");
  check_split(t.source_eval_x, &t.source_eval_y, a.input_dim, a.n_classes, "source eval split");
  check_split(t.target_eval_x, &t.target_eval_y, a.input_dim, a.n_classes, "target eval split");
}

double sigmoid(double t) {
  if (t >= 0.0) {
    return 1.0 / (1.0 + std::exp(-t));
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

/// Weight tensors copied out of the flat vector, in packing order.
struct Unpacked {
  Matrix Wc;  // n_classes x feature_dim
  Vector bc;
  Matrix W1;  // hidden x input
  Vector b1;
  Matrix W2;  // feature x hidden
  Vector b2;
  Matrix V1;  // domain_hidden x feature
  Vector d1;
  Vector V2;  // domain_hidden (the final 1 x dh row, stored flat)
  double d2 = 0.0;
};

Unpacked unpack(const DalArchitecture& a, const Vector& w) {
  Unpacked u;
  Index off = 0;
  const auto take_matrix = [&](Index rows, Index cols) {
    Matrix m = Eigen::Map<const Matrix>(w.data() + off, rows, cols);
    off += rows * cols;
    return m;
  };
  const auto take_vector = [&](Index n) {
    Vector v = Eigen::Map<const Vector>(w.data() + off, n);
    off += n;
    return v;
  };
  u.Wc = take_matrix(a.n_classes, a.feature_dim);
  u.bc = take_vector(a.n_classes);
  u.W1 = take_matrix(a.hidden_dim, a.input_dim);
  u.b1 = take_vector(a.hidden_dim);
  u.W2 = take_matrix(a.feature_dim, a.hidden_dim);
  u.b2 = take_vector(a.feature_dim);
  u.V1 = take_matrix(a.domain_hidden_dim, a.feature_dim);
  u.d1 = take_vector(a.domain_hidden_dim);
  u.V2 = take_vector(a.domain_hidden_dim);
  u.d2 = w[off++];
  return u;
}

/// Per-tensor gradient accumulator mirroring Unpacked.
struct GradAccum {
  Matrix Wc;
  Vector bc;
  Matrix W1;
  Vector b1;
  Matrix W2;
  Vector b2;
  Matrix V1;
  Vector d1;
  Vector V2;
  double d2 = 0.0;

  explicit GradAccum(const DalArchitecture& a)
      : Wc(Matrix::Zero(a.n_classes, a.feature_dim)),
        bc(Vector::Zero(a.n_classes)),
        W1(Matrix::Zero(a.hidden_dim, a.input_dim)),
        b1(Vector::Zero(a.hidden_dim)),
        W2(Matrix::Zero(a.feature_dim, a.hidden_dim)),
        b2(Vector::Zero(a.feature_dim)),
        V1(Matrix::Zero(a.domain_hidden_dim, a.feature_dim)),
        d1(Vector::Zero(a.domain_hidden_dim)),
        V2(Vector::Zero(a.domain_hidden_dim)) {}
};

Vector pack(const DalArchitecture& a, const GradAccum& g) {
  Vector w(a.dim());
  Index off = 0;
  const auto put_matrix = [&](const Matrix& m) {
    Eigen::Map<Matrix>(w.data() + off, m.rows(), m.cols()) = m;
    off += m.size();
  };
  const auto put_vector = [&](const Vector& v) {
    Eigen::Map<Vector>(w.data() + off, v.size()) = v;
    off += v.size();
  };
  put_matrix(g.Wc);
  put_vector(g.bc);
  put_matrix(g.W1);
  put_vector(g.b1);
  put_matrix(g.W2);
  put_vector(g.b2);
  put_matrix(g.V1);
  put_vector(g.d1);
  put_vector(g.V2);
  w[off++] = g.d2;
  return w;
}

/// Activations kept for the backward pass. Both extractor layers are tanh, so
/// every feature coordinate is bounded; gradients cannot overflow from the
/// activations alone.
struct ForwardCache {
  Matrix x;   // n x input
  Matrix a1;  // n x hidden, post-tanh
  Matrix f;   // n x feature, post-tanh
  Matrix c;   // n x classes
  Matrix t1;  // n x domain_hidden, post-tanh
  Vector t;   // n, domain logits
};

ForwardCache run_forward(const Unpacked& u, const Matrix& x) {
  ForwardCache cache;
  cache.x = x;
  cache.a1 = ((x * u.W1.transpose()).rowwise() + u.b1.transpose()).array().tanh().matrix();
  cache.f =
      ((cache.a1 * u.W2.transpose()).rowwise() + u.b2.transpose()).array().tanh().matrix();
  cache.c = (cache.f * u.Wc.transpose()).rowwise() + u.bc.transpose();
  cache.t1 =
      ((cache.f * u.V1.transpose()).rowwise() + u.d1.transpose()).array().tanh().matrix();
  cache.t = (cache.t1 * u.V2).array() + u.d2;
  return cache;
}

double task_loss_from(const ForwardCache& src, const std::vector<int>& y) {
  const Index n = src.c.rows();
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double m = src.c.row(i).maxCoeff();
    double sum = 0.0;
    for (Index j = 0; j < src.c.cols(); ++j) {
      sum += std::exp(src.c(i, j) - m);
    }
    total += m + std::log(sum) - src.c(i, y[static_cast<std::size_t>(i)]);
  }
  return total / static_cast<double>(n);
}

double divergence_from(const ForwardCache& src, const ForwardCache& tgt) {
  // mean log sigma(t) on source + mean log(1 - sigma(t)) on target, in the
  // softplus forms that stay finite for any logit.
  double acc_s = 0.0;
  for (Index i = 0; i < src.t.size(); ++i) {
    acc_s += -softplus(-src.t[i]);
  }
  double acc_t = 0.0;
  for (Index i = 0; i < tgt.t.size(); ++i) {
    acc_t += -softplus(tgt.t[i]);
  }
  return acc_s / static_cast<double>(src.t.size()) + acc_t / static_cast<double>(tgt.t.size());
}

/// Domain-branch backward for one split. dt is the (already scaled) upstream
/// at the domain logits. head_scale weighs the contribution into the domain
/// head's own parameters, feature_scale the contribution into the features;
/// they differ only on the reversal-layer route.
void domain_branch(const Unpacked& u, const ForwardCache& cache, const Vector& dt,
                   double head_scale, double feature_scale, GradAccum& g, Matrix& d_features) {
  const Matrix dT1 = dt * u.V2.transpose();  // n x dh
  const Matrix dZ1 = (dT1.array() * (1.0 - cache.t1.array().square())).matrix();
  g.V2 += head_scale * (cache.t1.transpose() * dt);
  g.d2 += head_scale * dt.sum();
  g.V1 += head_scale * (dZ1.transpose() * cache.f);
  g.d1 += head_scale * dZ1.colwise().sum().transpose();
  d_features += feature_scale * (dZ1 * u.V1);
}

void extractor_branch(const Unpacked& u, const ForwardCache& cache, const Matrix& d_features,
                      GradAccum& g) {
  const Matrix dZ2 = (d_features.array() * (1.0 - cache.f.array().square())).matrix();
  g.W2 += dZ2.transpose() * cache.a1;
  g.b2 += dZ2.colwise().sum().transpose();
  const Matrix dA1 = dZ2 * u.W2;
  const Matrix dZh = (dA1.array() * (1.0 - cache.a1.array().square())).matrix();
  g.W1 += dZh.transpose() * cache.x;
  g.b1 += dZh.colwise().sum().transpose();
}

/// One full backward pass of c_task * task_loss + c_div * divergence over the
/// shared forward caches. On the reversal-layer route the divergence scale
/// splits: c_div is applied upstream at the domain logits, head_scale stays 1
/// and feature_scale carries the reversal factor; everywhere else both scales
/// are 1.
Vector weighted_backward(const DalArchitecture& arch, const Unpacked& u,
                         const ForwardCache& src, const std::vector<int>& y,
                         const ForwardCache& tgt, double c_task, double c_div,
                         double head_scale, double feature_scale) {
  GradAccum g(arch);
  const Index ns = src.x.rows();
  const Index nt = tgt.x.rows();
  Matrix dF_s = Matrix::Zero(ns, arch.feature_dim);
  Matrix dF_t = Matrix::Zero(nt, arch.feature_dim);

  if (c_task != 0.0) {
    Matrix p(ns, arch.n_classes);
    for (Index i = 0; i < ns; ++i) {
      const double m = src.c.row(i).maxCoeff();
      double sum = 0.0;
      for (Index j = 0; j < arch.n_classes; ++j) {
        p(i, j) = std::exp(src.c(i, j) - m);
        sum += p(i, j);
      }
      p.row(i) /= sum;
      p(i, y[static_cast<std::size_t>(i)]) -= 1.0;
    }
    p *= c_task / static_cast<double>(ns);
    g.Wc += p.transpose() * src.f;
    g.bc += p.colwise().sum().transpose();
    dF_s += p * u.Wc;
  }

  if (c_div != 0.0) {
    Vector dt_s(ns);
    for (Index i = 0; i < ns; ++i) {
      dt_s[i] = c_div * (1.0 - sigmoid(src.t[i])) / static_cast<double>(ns);
    }
    Vector dt_t(nt);
    for (Index i = 0; i < nt; ++i) {
      dt_t[i] = c_div * (-sigmoid(tgt.t[i])) / static_cast<double>(nt);
    }
    domain_branch(u, src, dt_s, head_scale, feature_scale, g, dF_s);
    domain_branch(u, tgt, dt_t, head_scale, feature_scale, g, dF_t);
  }

  extractor_branch(u, src, dF_s, g);
  extractor_branch(u, tgt, dF_t, g);
  return pack(arch, g);
}

struct EvalSetup {
  Unpacked u;
  ForwardCache src;
  ForwardCache tgt;
};

EvalSetup shared_forward(const DalModel& model, const Matrix& source_x, const Matrix& target_x) {
  EvalSetup s;
  s.u = unpack(model.arch, model.weights);
  s.src = run_forward(s.u, source_x);
  s.tgt = run_forward(s.u, target_x);
  return s;
}

/// Player coefficient pairs (c_task, c_div) in block order.
std::array<std::pair<double, double>, 3> player_coefficients(double alpha, double lambda) {
  return {{{1.0, alpha}, {1.0, alpha * lambda}, {0.0, -alpha}}};
}

Vector stacked_field(const DalModel& model, const EvalSetup& s, const std::vector<int>& y) {
  const Partition partition = model.arch.partition();
  const auto coeff = player_coefficients(model.alpha, model.lambda);
  Vector out(model.arch.dim());
  for (int i = 0; i < 3; ++i) {
    const Vector full = weighted_backward(model.arch, s.u, s.src, y, s.tgt,
                                          coeff[static_cast<std::size_t>(i)].first,
                                          coeff[static_cast<std::size_t>(i)].second, 1.0, 1.0);
    const Block b = partition.block(i);
    out.segment(b.offset, b.length) = full.segment(b.offset, b.length);
  }
  if (!out.allFinite()) {
    throw NonFiniteValue("dal pseudo-gradient has non-finite entries");
  }
  return out;
}

double accuracy_from(const Unpacked& u, const Matrix& x, const std::vector<int>& y) {
  const ForwardCache cache = run_forward(u, x);
  Index hits = 0;
  for (Index i = 0; i < cache.c.rows(); ++i) {
    Index best = 0;
    for (Index j = 1; j < cache.c.cols(); ++j) {
      if (cache.c(i, j) > cache.c(i, best)) best = j;
    }
    if (best == y[static_cast<std::size_t>(i)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(cache.c.rows());
}

Matrix gather_rows(const Matrix& m, const std::vector<Index>& idx) {
  Matrix out(static_cast<Index>(idx.size()), m.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= m.rows()) {
      throw std::out_of_range("dal batch: sample index out of range");
    }
    out.row(static_cast<Index>(k)) = m.row(idx[k]);
  }
  return out;
}

}  // namespace

Partition DalArchitecture::partition() const {
  check_arch(*this);
  return Partition({classifier_dim(), extractor_dim(), domain_dim()});
}

DalModel DalModel::init(const DalArchitecture& arch, double alpha, double lambda,
                        std::uint64_t seed) {
  check_arch(arch);
  DalModel model;
  model.arch = arch;
  model.alpha = alpha;
  model.lambda = lambda;
  model.weights = Vector(arch.dim());
  Rng rng(seed);
  Index off = 0;
  const auto fill = [&](Index count, Index fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Index k = 0; k < count; ++k) {
      model.weights[off++] = rng.uniform(-bound, bound);
    }
  };
  fill(arch.n_classes * arch.feature_dim + arch.n_classes, arch.feature_dim);
  fill(arch.hidden_dim * arch.input_dim + arch.hidden_dim, arch.input_dim);
  fill(arch.feature_dim * arch.hidden_dim + arch.feature_dim, arch.hidden_dim);
  fill(arch.domain_hidden_dim * arch.feature_dim + arch.domain_hidden_dim, arch.feature_dim);
  fill(arch.domain_hidden_dim + 1, arch.domain_hidden_dim);
  check_model(model);
  return model;
}

DalForward forward(const DalModel& model, const Matrix& x) {
  check_model(model);
  if (x.cols() != model.arch.input_dim) {
    throw std::invalid_argument("forward: input has wrong column count");
  }
  const Unpacked u = unpack(model.arch, model.weights);
  const ForwardCache cache = run_forward(u, x);
  DalForward out;
  out.features = cache.f;
  out.class_logits = cache.c;
  out.domain_logits = cache.t;
  return out;
}

TransferTask make_task(const TaskParams& params) {
  if (params.n_per_domain < 10) {
    throw ConfigError("make_task: n_per_domain must be >= 10");
  }
  if (params.n_eval_per_domain < 10) {
    throw ConfigError("make_task: n_eval_per_domain must be >= 10");
  }
  if (!(params.cluster_std > 0.0) || !(params.cluster_separation >= 0.0)) {
    throw ConfigError("make_task: cluster_std must be > 0 and separation >= 0");
  }
  const Rng root(params.seed);

  const auto sample = [&](Rng rng, Index n, Matrix& x, std::vector<int>& y) {
    x.resize(n, 2);
    y.resize(static_cast<std::size_t>(n));
    const Index n0 = (n + 1) / 2;
    const double half = 0.5 * params.cluster_separation;
    for (Index i = 0; i < n; ++i) {
      const int label = i < n0 ? 0 : 1;
      const double mean_x = label == 0 ? -half : half;
      x(i, 0) = mean_x + params.cluster_std * rng.normal();
      x(i, 1) = params.cluster_std * rng.normal();
      y[static_cast<std::size_t>(i)] = label;
    }
  };

  TransferTask task;
  task.params = params;
  // Identical sub-streams for source and target base draws: with zero shift
  // and zero rotation the two domains coincide sample for sample.
  sample(root.split(1), params.n_per_domain, task.source_x, task.source_y);
  sample(root.split(1), params.n_per_domain, task.target_x, task.target_y);
  sample(root.split(2), params.n_eval_per_domain, task.source_eval_x, task.source_eval_y);
  sample(root.split(2), params.n_eval_per_domain, task.target_eval_x, task.target_eval_y);

  const double c = std::cos(params.target_rotation);
  const double s = std::sin(params.target_rotation);
  Matrix rot(2, 2);
  rot << c, -s,
         s, c;
  Eigen::RowVector2d shift(params.target_shift_x, params.target_shift_y);
  task.target_x = ((task.target_x * rot.transpose()).rowwise() + shift).eval();
  task.target_eval_x = ((task.target_eval_x * rot.transpose()).rowwise() + shift).eval();
  return task;
}

DalLossTerms dal_loss_terms(const DalModel& model, const TransferTask& task) {
  check_model(model);
  check_task(task, model.arch);
  const EvalSetup s = shared_forward(model, task.source_x, task.target_x);
  DalLossTerms terms;
  terms.task_loss = task_loss_from(s.src, task.source_y);
  terms.divergence = divergence_from(s.src, s.tgt);
  if (!std::isfinite(terms.task_loss) || !std::isfinite(terms.divergence)) {
    throw NonFiniteValue("dal loss terms are non-finite");
  }
  return terms;
}

Vector dal_costs(const DalModel& model, const TransferTask& task) {
  const DalLossTerms terms = dal_loss_terms(model, task);
  Vector costs(3);
  costs[0] = terms.task_loss + model.alpha * terms.divergence;
  costs[1] = terms.task_loss + model.alpha * model.lambda * terms.divergence;
  costs[2] = -model.alpha * terms.divergence;
  return costs;
}

VectorFieldEval dal_pseudo_gradient(const DalModel& model, const TransferTask& task) {
  check_model(model);
  check_task(task, model.arch);
  const EvalSetup s = shared_forward(model, task.source_x, task.target_x);
  VectorFieldEval eval{stacked_field(model, s, task.source_y),
                       JointParams(model.weights, model.arch.partition())};
  return eval;
}

Vector dal_player_gradient(const DalModel& model, const TransferTask& task, int player) {
  check_model(model);
  check_task(task, model.arch);
  if (player < 0 || player >= 3) {
    throw std::out_of_range("dal_player_gradient: player must be 0, 1, or 2");
  }
  const EvalSetup s = shared_forward(model, task.source_x, task.target_x);
  const auto coeff = player_coefficients(model.alpha, model.lambda);
  const Vector full = weighted_backward(model.arch, s.u, s.src, task.source_y, s.tgt,
                                        coeff[static_cast<std::size_t>(player)].first,
                                        coeff[static_cast<std::size_t>(player)].second, 1.0, 1.0);
  const Block b = model.arch.partition().block(player);
  Vector out = full.segment(b.offset, b.length);
  if (!out.allFinite()) {
    throw NonFiniteValue("dal player gradient has non-finite entries", player);
  }
  return out;
}

Vector dal_grl_gradient(const DalModel& model, const TransferTask& task) {
  check_model(model);
  check_task(task, model.arch);
  const EvalSetup s = shared_forward(model, task.source_x, task.target_x);
  // Single objective task - alpha * divergence; the factor -lambda rides on
  // the divergence path where it crosses into the features.
  Vector out = weighted_backward(model.arch, s.u, s.src, task.source_y, s.tgt,
                                 /*c_task=*/1.0, /*c_div=*/-model.alpha,
                                 /*head_scale=*/1.0, /*feature_scale=*/-model.lambda);
  if (!out.allFinite()) {
    throw NonFiniteValue("dal reversal-route gradient has non-finite entries");
  }
  return out;
}

DalTermGradients dal_term_gradients(const DalModel& model, const TransferTask& task) {
  check_model(model);
  check_task(task, model.arch);
  const EvalSetup s = shared_forward(model, task.source_x, task.target_x);
  DalTermGradients grads;
  grads.task_loss = weighted_backward(model.arch, s.u, s.src, task.source_y, s.tgt, 1.0, 0.0,
                                      1.0, 1.0);
  grads.divergence = weighted_backward(model.arch, s.u, s.src, task.source_y, s.tgt, 0.0, 1.0,
                                       1.0, 1.0);
  return grads;
}

double transfer_accuracy(const DalModel& model, const TransferTask& task) {
  check_model(model);
  check_task(task, model.arch);
  const Unpacked u = unpack(model.arch, model.weights);
  return accuracy_from(u, task.target_eval_x, task.target_eval_y);
}

double source_accuracy(const DalModel& model, const TransferTask& task) {
  check_model(model);
  check_task(task, model.arch);
  const Unpacked u = unpack(model.arch, model.weights);
  return accuracy_from(u, task.source_eval_x, task.source_eval_y);
}

GameDefinition make_dal_game(const DalModel& model, const TransferTask& task) {
  check_model(model);
  check_task(task, model.arch);
  const auto shared_task = std::make_shared<const TransferTask>(task);
  const DalArchitecture arch = model.arch;
  const double alpha = model.alpha;
  const double lambda = model.lambda;
  const auto at = [arch, alpha, lambda](const Vector& w) {
    return DalModel{arch, alpha, lambda, w};
  };
  const Partition partition = arch.partition();

  std::vector<CostFn> costs;
  std::vector<BlockGradFn> grads;
  for (int i = 0; i < 3; ++i) {
    costs.push_back([at, shared_task, i](const Vector& w) -> double {
      return dal_costs(at(w), *shared_task)[i];
    });
    grads.push_back([at, shared_task, i](const Vector& w) -> Vector {
      return dal_player_gradient(at(w), *shared_task, i);
    });
  }
  GameDefinition game(partition, std::move(costs), std::move(grads));

  AlignmentConflictSplit split;
  split.alpha = alpha;
  split.lambda = lambda;
  split.task_loss = [at, shared_task](const Vector& w) {
    return dal_loss_terms(at(w), *shared_task).task_loss;
  };
  split.divergence = [at, shared_task](const Vector& w) {
    return dal_loss_terms(at(w), *shared_task).divergence;
  };
  const Block b0 = partition.block(0);
  const Block b1 = partition.block(1);
  const Block b2 = partition.block(2);
  split.task_loss_grad0 = [at, shared_task, b0](const Vector& w) -> Vector {
    return dal_term_gradients(at(w), *shared_task).task_loss.segment(b0.offset, b0.length);
  };
  split.task_loss_grad1 = [at, shared_task, b1](const Vector& w) -> Vector {
    return dal_term_gradients(at(w), *shared_task).task_loss.segment(b1.offset, b1.length);
  };
  split.divergence_grad1 = [at, shared_task, b1](const Vector& w) -> Vector {
    return dal_term_gradients(at(w), *shared_task).divergence.segment(b1.offset, b1.length);
  };
  split.divergence_grad2 = [at, shared_task, b2](const Vector& w) -> Vector {
    return dal_term_gradients(at(w), *shared_task).divergence.segment(b2.offset, b2.length);
  };
  game.set_split(std::move(split));
  return game;
}

MinibatchSchedule::MinibatchSchedule(Index n_source, Index n_target, Index batch_size,
                                     std::uint64_t seed)
    : n_source_(n_source), n_target_(n_target), batch_size_(batch_size), seed_(seed) {
  if (n_source_ < 1 || n_target_ < 1 || batch_size_ < 1) {
    throw ConfigError("MinibatchSchedule: sizes must be positive");
  }
  if (n_source_ != n_target_) {
    throw ConfigError("MinibatchSchedule: source and target split sizes must match "
                      "(epoch coverage would otherwise be uneven)");
  }
  if (n_source_ % batch_size_ != 0) {
    throw ConfigError("MinibatchSchedule: batch_size must divide the split size");
  }
  reshuffle();
}

void MinibatchSchedule::reshuffle() {
  source_order_.resize(static_cast<std::size_t>(n_source_));
  std::iota(source_order_.begin(), source_order_.end(), Index{0});
  target_order_.resize(static_cast<std::size_t>(n_target_));
  std::iota(target_order_.begin(), target_order_.end(), Index{0});
  Rng src_rng(mix_seed(seed_, 2 * epoch_));
  src_rng.shuffle(source_order_);
  Rng tgt_rng(mix_seed(seed_, 2 * epoch_ + 1));
  tgt_rng.shuffle(target_order_);
}

MinibatchSchedule::Batch MinibatchSchedule::next() {
  if (cursor_ >= batches_per_epoch()) {
    ++epoch_;
    cursor_ = 0;
    reshuffle();
  }
  Batch batch;
  const auto begin = static_cast<std::size_t>(cursor_ * batch_size_);
  const auto end = begin + static_cast<std::size_t>(batch_size_);
  batch.source.assign(source_order_.begin() + static_cast<std::ptrdiff_t>(begin),
                      source_order_.begin() + static_cast<std::ptrdiff_t>(end));
  batch.target.assign(target_order_.begin() + static_cast<std::ptrdiff_t>(begin),
                      target_order_.begin() + static_cast<std::ptrdiff_t>(end));
  ++cursor_;
  return batch;
}

Vector dal_batch_pseudo_gradient(const DalModel& model, const TransferTask& task,
                                 const MinibatchSchedule::Batch& batch) {
  check_model(model);
  check_task(task, model.arch);
  if (batch.source.empty() || batch.target.empty()) {
    throw std::invalid_argument("dal_batch_pseudo_gradient: empty batch");
  }
  const Matrix sx = gather_rows(task.source_x, batch.source);
  std::vector<int> sy(batch.source.size());
  for (std::size_t k = 0; k < batch.source.size(); ++k) {
    sy[k] = task.source_y[static_cast<std::size_t>(batch.source[k])];
  }
  const Matrix tx = gather_rows(task.target_x, batch.target);

  EvalSetup s;
  s.u = unpack(model.arch, model.weights);
  s.src = run_forward(s.u, sx);
  s.tgt = run_forward(s.u, tx);
  return stacked_field(model, s, sy);
}

}  // namespace gameopt
