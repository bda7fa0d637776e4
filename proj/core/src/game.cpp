#include "gameopt/game.hpp"

#include <Eigen/Eigenvalues>

#include <cfloat>
#include <cmath>
#include <memory>

namespace gameopt {

double default_tolerance(GradientMode mode) {
  return mode == GradientMode::Analytic ? 1e-8 : 1e-5;
}

double fd_step(double x) {
  static const double cbrt_eps = std::cbrt(DBL_EPSILON);
  return cbrt_eps * std::max(1.0, std::abs(x));
}

GameDefinition::GameDefinition(Partition partition, std::vector<CostFn> costs,
                               std::vector<BlockGradFn> block_grads,
                               FieldJacobianFn field_jacobian)
    : partition_(std::move(partition)),
      costs_(std::move(costs)),
      block_grads_(std::move(block_grads)),
      field_jacobian_(std::move(field_jacobian)) {
  const auto n = static_cast<std::size_t>(partition_.n_players());
  if (costs_.size() != n) {
    throw std::invalid_argument("GameDefinition: need one cost per player");
  }
  for (const auto& c : costs_) {
    if (!c) throw std::invalid_argument("GameDefinition: null cost function");
  }
  if (!block_grads_.empty()) {
    if (block_grads_.size() != n) {
      throw std::invalid_argument(
          "GameDefinition: block gradients must be absent or one per player");
    }
    for (const auto& g : block_grads_) {
      if (!g) throw std::invalid_argument("GameDefinition: null block gradient");
    }
  }
  mode_ = block_grads_.empty() ? GradientMode::FiniteDifference : GradientMode::Analytic;
}

double GameDefinition::cost(int player, const Vector& joint) const {
  if (joint.size() != dim()) {
    throw std::invalid_argument("GameDefinition::cost: point has wrong dimension");
  }
  const double value = costs_[static_cast<std::size_t>(player)](joint);
  if (!std::isfinite(value)) {
    throw NonFiniteValue(
        "cost of player " + std::to_string(player) + " is non-finite", player);
  }
  return value;
}

Vector GameDefinition::block_gradient(int player, const Vector& joint) const {
  const Block& blk = partition_.block(player);
  if (mode_ == GradientMode::Analytic) {
    Vector g = block_grads_[static_cast<std::size_t>(player)](joint);
    if (g.size() != blk.length) {
      throw std::invalid_argument("block gradient of player " + std::to_string(player) +
                                  " has wrong dimension");
    }
    if (!g.allFinite()) {
      throw NonFiniteValue(
          "gradient of player " + std::to_string(player) + " is non-finite", player);
    }
    return g;
  }
  // Central differences of J_player along its own block.
  Vector g(blk.length);
  Vector w = joint;
  for (Index k = 0; k < blk.length; ++k) {
    const Index j = blk.offset + k;
    const double saved = w[j];
    const double h = fd_step(saved);
    w[j] = saved + h;
    const double plus = cost(player, w);
    w[j] = saved - h;
    const double minus = cost(player, w);
    w[j] = saved;
    g[k] = (plus - minus) / (2.0 * h);
  }
  if (!g.allFinite()) {
    throw NonFiniteValue(
        "gradient of player " + std::to_string(player) + " is non-finite", player);
  }
  return g;
}

Matrix GameDefinition::field_jacobian(const Vector& joint) const {
  if (!field_jacobian_) {
    throw std::logic_error("GameDefinition: no analytic field Jacobian attached");
  }
  Matrix jac = field_jacobian_(joint);
  if (jac.rows() != dim() || jac.cols() != dim()) {
    throw std::invalid_argument("field Jacobian has wrong dimensions");
  }
  return jac;
}

Vector eval_costs(const GameDefinition& game, const JointParams& point) {
  if (point.partition() != game.partition()) {
    throw std::invalid_argument("eval_costs: point partition does not match game");
  }
  Vector out(game.n_players());
  for (int i = 0; i < game.n_players(); ++i) {
    out[i] = game.cost(i, point.values());
  }
  return out;
}

VectorFieldEval pseudo_gradient(const GameDefinition& game, const JointParams& point) {
  if (point.partition() != game.partition()) {
    throw std::invalid_argument("pseudo_gradient: point partition does not match game");
  }
  Vector v(game.dim());
  for (int i = 0; i < game.n_players(); ++i) {
    const Block& blk = game.partition().block(i);
    v.segment(blk.offset, blk.length) = game.block_gradient(i, point.values());
  }
  return VectorFieldEval{std::move(v), point};
}

GameJacobian game_hessian(const GameDefinition& game, const JointParams& point) {
  if (point.partition() != game.partition()) {
    throw std::invalid_argument("game_hessian: point partition does not match game");
  }
  if (game.has_field_jacobian()) {
    return GameJacobian{game.field_jacobian(point.values()), point};
  }
  // Column j: central difference of the whole field along coordinate j.
  const Index d = game.dim();
  Matrix hess(d, d);
  Vector w = point.values();
  for (Index j = 0; j < d; ++j) {
    const double saved = w[j];
    const double h = fd_step(saved);
    w[j] = saved + h;
    const Vector vp = pseudo_gradient(game, point.with_values(w)).value;
    w[j] = saved - h;
    const Vector vm = pseudo_gradient(game, point.with_values(w)).value;
    w[j] = saved;
    hess.col(j) = (vp - vm) / (2.0 * h);
  }
  return GameJacobian{std::move(hess), point};
}

GameClass classify_game(const GameJacobian& jac, double tol) {
  const Matrix& h = jac.matrix;
  const double asym = (h - h.transpose()).cwiseAbs().maxCoeff();
  if (asym <= tol) return GameClass::Potential;
  const double sym = (h + h.transpose()).cwiseAbs().maxCoeff();
  if (sym <= tol) return GameClass::PurelyAdversarial;
  Eigen::EigenSolver<Matrix> solver(h, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("classify_game: eigensolver did not converge");
  }
  if (solver.eigenvalues().real().cwiseAbs().maxCoeff() <= tol) {
    return GameClass::PurelyAdversarial;
  }
  return GameClass::General;
}

const char* to_string(GameClass c) {
  switch (c) {
    case GameClass::Potential: return "potential";
    case GameClass::PurelyAdversarial: return "purely_adversarial";
    case GameClass::General: return "general";
  }
  return "unknown";
}

namespace {

// Gradient of a scalar term restricted to one block: analytic callback when
// available, otherwise central differences.
Vector term_block_gradient(const CostFn& term, const BlockGradFn& grad, const Block& blk,
                           const Vector& joint) {
  if (grad) {
    Vector g = grad(joint);
    if (g.size() != blk.length) {
      throw std::invalid_argument("split gradient callback has wrong dimension");
    }
    return g;
  }
  Vector g(blk.length);
  Vector w = joint;
  for (Index k = 0; k < blk.length; ++k) {
    const Index j = blk.offset + k;
    const double saved = w[j];
    const double h = fd_step(saved);
    w[j] = saved + h;
    const double plus = term(w);
    w[j] = saved - h;
    const double minus = term(w);
    w[j] = saved;
    g[k] = (plus - minus) / (2.0 * h);
  }
  return g;
}

}  // namespace

CooperationCompetition decompose_cooperation_competition(const GameDefinition& game,
                                                         const JointParams& point) {
  if (!game.split()) {
    throw UnsupportedGame(
        "cooperation/competition split needs a game with a task/divergence structure");
  }
  if (game.n_players() != 3) {
    throw UnsupportedGame("cooperation/competition split is defined for 3 players");
  }
  const AlignmentConflictSplit& s = *game.split();
  const Partition& part = game.partition();
  const Vector& w = point.values();

  Vector potential = Vector::Zero(game.dim());
  Vector adversarial = Vector::Zero(game.dim());

  const Block& b0 = part.block(0);
  const Block& b1 = part.block(1);
  const Block& b2 = part.block(2);

  potential.segment(b0.offset, b0.length) =
      term_block_gradient(s.task_loss, s.task_loss_grad0, b0, w);
  potential.segment(b1.offset, b1.length) =
      term_block_gradient(s.task_loss, s.task_loss_grad1, b1, w);
  // The divergence does not reach block 0, so the adversarial part is zero
  // there; that structural fact is what makes the two parts sum to v.
  adversarial.segment(b1.offset, b1.length) =
      s.alpha * s.lambda * term_block_gradient(s.divergence, s.divergence_grad1, b1, w);
  adversarial.segment(b2.offset, b2.length) =
      -s.alpha * term_block_gradient(s.divergence, s.divergence_grad2, b2, w);

  if (!potential.allFinite() || !adversarial.allFinite()) {
    throw NonFiniteValue("cooperation/competition split produced non-finite values");
  }
  return CooperationCompetition{std::move(potential), std::move(adversarial)};
}

std::function<Vector(const Vector&)> field_function(const GameDefinition& game) {
  // Copy shares the underlying closures; safe to call concurrently.
  auto shared = std::make_shared<GameDefinition>(game);
  return [shared](const Vector& w) {
    return pseudo_gradient(*shared, JointParams(w, shared->partition())).value;
  };
}

}  // namespace gameopt
