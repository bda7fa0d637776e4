#include "gameopt/quadratic.hpp"

#include <cmath>
#include <memory>
#include <utility>

#include <unsupported/Eigen/MatrixFunctions>

#include "gameopt/rng.hpp"

namespace gameopt {

namespace {

void require_symmetric(const Matrix& q, const std::string& what) {
  const Matrix diff = q - q.transpose();
  const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
  if (diff.cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw AsymmetricInput(what + " must be symmetric");
  }
}

}  // namespace

QuadraticGame::QuadraticGame(Partition partition, std::vector<Matrix> cost_matrices,
                             std::vector<Vector> cost_offsets)
    : partition_(std::move(partition)),
      cost_matrices_(std::move(cost_matrices)),
      cost_offsets_(std::move(cost_offsets)) {
  const Index d = partition_.dim();
  const auto n = static_cast<std::size_t>(partition_.n_players());
  if (cost_matrices_.size() != n) {
    throw std::invalid_argument("QuadraticGame: need one cost matrix per player");
  }
  if (cost_offsets_.empty()) {
    cost_offsets_.assign(n, Vector::Zero(d));
  }
  if (cost_offsets_.size() != n) {
    throw std::invalid_argument("QuadraticGame: need one cost offset per player");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (cost_matrices_[i].rows() != d || cost_matrices_[i].cols() != d) {
      throw std::invalid_argument("QuadraticGame: cost matrix " + std::to_string(i + 1) +
                                  " must be " + std::to_string(d) + "x" + std::to_string(d));
    }
    if (!cost_matrices_[i].allFinite()) {
      throw NonFiniteValue("QuadraticGame: cost matrix " + std::to_string(i + 1) +
                           " has non-finite entries");
    }
    require_symmetric(cost_matrices_[i], "QuadraticGame: cost matrix " + std::to_string(i + 1));
    if (cost_offsets_[i].size() != d) {
      throw std::invalid_argument("QuadraticGame: cost offset " + std::to_string(i + 1) +
                                  " must have length " + std::to_string(d));
    }
    if (!cost_offsets_[i].allFinite()) {
      throw NonFiniteValue("QuadraticGame: cost offset " + std::to_string(i + 1) +
                           " has non-finite entries");
    }
  }

  field_matrix_ = Matrix::Zero(d, d);
  field_offset_ = Vector::Zero(d);
  for (int i = 0; i < partition_.n_players(); ++i) {
    const Block b = partition_.block(i);
    field_matrix_.middleRows(b.offset, b.length) =
        cost_matrices_[static_cast<std::size_t>(i)].middleRows(b.offset, b.length);
    field_offset_.segment(b.offset, b.length) =
        cost_offsets_[static_cast<std::size_t>(i)].segment(b.offset, b.length);
  }
}

QuadraticGame QuadraticGame::alignment_conflict(const Partition& partition,
                                                const Matrix& task_matrix,
                                                const Matrix& divergence_matrix, double alpha,
                                                double lambda) {
  if (partition.n_players() != 3) {
    throw std::invalid_argument("alignment_conflict: needs exactly three players");
  }
  const Index d = partition.dim();
  if (task_matrix.rows() != d || task_matrix.cols() != d || divergence_matrix.rows() != d ||
      divergence_matrix.cols() != d) {
    throw std::invalid_argument("alignment_conflict: matrices must match the partition dim");
  }
  require_symmetric(task_matrix, "alignment_conflict: task matrix");
  require_symmetric(divergence_matrix, "alignment_conflict: divergence matrix");
  const Block cls = partition.block(0);
  const Block dom = partition.block(2);
  if (task_matrix.middleRows(dom.offset, dom.length).cwiseAbs().maxCoeff() != 0.0 ||
      task_matrix.middleCols(dom.offset, dom.length).cwiseAbs().maxCoeff() != 0.0) {
    throw std::invalid_argument(
        "alignment_conflict: task matrix must not touch the third block");
  }
  if (divergence_matrix.middleRows(cls.offset, cls.length).cwiseAbs().maxCoeff() != 0.0 ||
      divergence_matrix.middleCols(cls.offset, cls.length).cwiseAbs().maxCoeff() != 0.0) {
    throw std::invalid_argument(
        "alignment_conflict: divergence matrix must not touch the first block");
  }
  if (!std::isfinite(alpha) || !std::isfinite(lambda)) {
    throw std::invalid_argument("alignment_conflict: alpha and lambda must be finite");
  }

  std::vector<Matrix> costs;
  costs.push_back(task_matrix + alpha * divergence_matrix);
  costs.push_back(task_matrix + alpha * lambda * divergence_matrix);
  costs.push_back(-alpha * divergence_matrix);
  QuadraticGame game(partition, std::move(costs));
  game.split_ = SplitMatrices{task_matrix, divergence_matrix, alpha, lambda};
  return game;
}

const Matrix& QuadraticGame::cost_matrix(int player) const {
  if (player < 0 || player >= n_players()) {
    throw std::out_of_range("QuadraticGame::cost_matrix: player index out of range");
  }
  return cost_matrices_[static_cast<std::size_t>(player)];
}

const Vector& QuadraticGame::cost_offset(int player) const {
  if (player < 0 || player >= n_players()) {
    throw std::out_of_range("QuadraticGame::cost_offset: player index out of range");
  }
  return cost_offsets_[static_cast<std::size_t>(player)];
}

double QuadraticGame::cost(int player, const Vector& w) const {
  if (player < 0 || player >= n_players()) {
    throw std::out_of_range("QuadraticGame::cost: player index out of range");
  }
  if (w.size() != dim()) {
    throw std::invalid_argument("QuadraticGame::cost: point has wrong dimension");
  }
  const auto i = static_cast<std::size_t>(player);
  return 0.5 * w.dot(cost_matrices_[i] * w) + cost_offsets_[i].dot(w);
}

GameDefinition QuadraticGame::as_game() const {
  auto self = std::make_shared<const QuadraticGame>(*this);
  const int n = n_players();
  std::vector<CostFn> costs;
  std::vector<BlockGradFn> grads;
  costs.reserve(static_cast<std::size_t>(n));
  grads.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    costs.push_back([self, i](const Vector& w) { return self->cost(i, w); });
    const Block b = partition_.block(i);
    grads.push_back([self, i, b](const Vector& w) -> Vector {
      const auto idx = static_cast<std::size_t>(i);
      return self->cost_matrices_[idx].middleRows(b.offset, b.length) * w +
             self->cost_offsets_[idx].segment(b.offset, b.length);
    });
  }
  FieldJacobianFn jacobian = [self](const Vector&) -> Matrix { return self->field_matrix_; };
  GameDefinition game(partition_, std::move(costs), std::move(grads), std::move(jacobian));

  if (split_) {
    const Matrix T = split_->task;
    const Matrix D = split_->divergence;
    const Block b0 = partition_.block(0);
    const Block b1 = partition_.block(1);
    const Block b2 = partition_.block(2);
    AlignmentConflictSplit split;
    split.alpha = split_->alpha;
    split.lambda = split_->lambda;
    split.task_loss = [T](const Vector& w) { return 0.5 * w.dot(T * w); };
    split.divergence = [D](const Vector& w) { return 0.5 * w.dot(D * w); };
    split.task_loss_grad0 = [T, b0](const Vector& w) -> Vector {
      return T.middleRows(b0.offset, b0.length) * w;
    };
    split.task_loss_grad1 = [T, b1](const Vector& w) -> Vector {
      return T.middleRows(b1.offset, b1.length) * w;
    };
    split.divergence_grad1 = [D, b1](const Vector& w) -> Vector {
      return D.middleRows(b1.offset, b1.length) * w;
    };
    split.divergence_grad2 = [D, b2](const Vector& w) -> Vector {
      return D.middleRows(b2.offset, b2.length) * w;
    };
    game.set_split(std::move(split));
  }
  return game;
}

QuadraticGame make_example1_three_player() {
  Matrix q(3, 3);
  q << 1, 2, 0,
       2, 1, 0,
       0, 0, -1;
  return QuadraticGame(Partition({1, 1, 1}), {q, q, -q});
}

QuadraticGame make_example1_two_player() {
  Matrix q(3, 3);
  q << 1, 2, 0,
       2, 1, 0,
       0, 0, -1;
  return QuadraticGame(Partition({2, 1}), {q, -q});
}

QuadraticGame make_example2(double alpha, double lambda) {
  Matrix task(3, 3);
  task << 2, 2, 0,
          2, 2, 0,
          0, 0, 0;
  Matrix divergence(3, 3);
  divergence << 0, 0,  0,
                0, 2,  99,
                0, 99, -2;
  return QuadraticGame::alignment_conflict(Partition({1, 1, 1}), task, divergence, alpha,
                                           lambda);
}

Vector exact_flow(const Matrix& field_matrix, const Vector& w0, double t) {
  if (field_matrix.rows() != field_matrix.cols() || field_matrix.rows() != w0.size()) {
    throw std::invalid_argument("exact_flow: dimension mismatch");
  }
  if (!std::isfinite(t)) {
    throw std::invalid_argument("exact_flow: t must be finite");
  }
  const Matrix propagator = (-t * field_matrix).exp();
  Vector out = propagator * w0;
  if (!out.allFinite()) {
    throw ConvergenceFailure("exact_flow: matrix exponential overflowed");
  }
  return out;
}

QuadraticGame make_random_quadratic(std::uint64_t seed, Index d_per_player,
                                    SpectralProfile profile,
                                    const RandomQuadraticOptions& options) {
  if (d_per_player < 1) {
    throw std::invalid_argument("make_random_quadratic: d_per_player must be >= 1");
  }
  if (options.n_players < 2) {
    throw std::invalid_argument("make_random_quadratic: need at least two players");
  }
  if (!(options.real_min <= options.real_max)) {
    throw std::invalid_argument("make_random_quadratic: real_min must be <= real_max");
  }
  if (!(options.skew_scale >= 0.0)) {
    throw std::invalid_argument("make_random_quadratic: skew_scale must be >= 0");
  }
  const int n = options.n_players;
  const Index d = d_per_player * n;
  Partition partition(std::vector<Index>(static_cast<std::size_t>(n), d_per_player));
  Rng rng(seed);

  // Symmetric part with spectrum drawn inside [real_min, real_max]; by the
  // Bendixson bounds this pins Re(spec) of the full field matrix.
  Matrix sym = Matrix::Zero(d, d);
  if (profile != SpectralProfile::Skew) {
    const Matrix basis = rng.orthogonal_matrix(d);
    Vector eigs(d);
    for (Index i = 0; i < d; ++i) {
      eigs[i] = rng.uniform(options.real_min, options.real_max);
    }
    // Symmetrize from a separate temporary: aliasing sym with its own
    // transpose corrupts entries, and averaging commuted sums makes the
    // result bitwise symmetric rather than symmetric up to roundoff.
    const Matrix raw = basis * eigs.asDiagonal() * basis.transpose();
    sym = 0.5 * (raw + raw.transpose());
  }

  Matrix skew = Matrix::Zero(d, d);
  if (profile != SpectralProfile::Symmetric && options.skew_scale > 0.0) {
    const Matrix g = rng.normal_matrix(d, d);
    skew = 0.5 * options.skew_scale * (g - g.transpose());
    // Zero own blocks so each player's cost matrix stays symmetric.
    for (int i = 0; i < n; ++i) {
      const Block b = partition.block(i);
      skew.block(b.offset, b.offset, b.length, b.length).setZero();
    }
  }

  const Matrix field = sym + skew;
  std::vector<Matrix> costs;
  costs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Block b = partition.block(i);
    Matrix q = Matrix::Zero(d, d);
    q.middleRows(b.offset, b.length) = field.middleRows(b.offset, b.length);
    q.middleCols(b.offset, b.length) =
        field.middleRows(b.offset, b.length).transpose();
    costs.push_back(std::move(q));
  }
  return QuadraticGame(std::move(partition), std::move(costs));
}

bool is_named_quadratic(const std::string& name) {
  return name == "example1-3p" || name == "example1-2p" || name == "example2";
}

QuadraticGame make_named_quadratic(const std::string& name) {
  if (name == "example1-3p") return make_example1_three_player();
  if (name == "example1-2p") return make_example1_two_player();
  if (name == "example2") return make_example2();
  throw ConfigError("unknown game name '" + name +
                    "' (expected example1-3p, example1-2p, or example2)");
}

}  // namespace gameopt
