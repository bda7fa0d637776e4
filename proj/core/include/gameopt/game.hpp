#pragma once

#include "gameopt/types.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace gameopt {

/// How per-player gradients are obtained.
enum class GradientMode {
  Analytic,          // caller supplied exact block gradients
  FiniteDifference,  // central differences of the scalar costs
};

/// Default absolute tolerance for residual and eigenvalue tests, chosen to
/// sit well above the respective noise floors: exact gradients are clean to
/// machine precision; central differences carry O(h^2) truncation error with
/// h ~ cbrt(machine epsilon).
double default_tolerance(GradientMode mode);

using CostFn = std::function<double(const Vector&)>;
using BlockGradFn = std::function<Vector(const Vector&)>;
using FieldJacobianFn = std::function<Matrix(const Vector&)>;

/// Optional extra structure for domain-adaptation style games: every player's
/// cost is task_loss + coefficient * divergence. Enables the
/// cooperation/competition split. Gradient callbacks are optional; absent
/// ones fall back to finite differences of the scalar terms.
struct AlignmentConflictSplit {
  CostFn task_loss;   // shared accuracy term, depends on blocks 0 and 1
  CostFn divergence;  // domain discrepancy term, depends on blocks 1 and 2
  double alpha = 1.0;   // weight of the divergence in the cost sum
  double lambda = 1.0;  // extractor's extra factor on the divergence
  BlockGradFn task_loss_grad0;   // d task_loss / d block0 (classifier head)
  BlockGradFn task_loss_grad1;   // d task_loss / d block1 (feature extractor)
  BlockGradFn divergence_grad1;  // d divergence / d block1
  BlockGradFn divergence_grad2;  // d divergence / d block2 (domain head)
};

/// An n-player smooth game over a partitioned parameter vector. Player i
/// controls block i and pays cost J_i(w), a function of the whole joint
/// point. Immutable after construction; all evaluation entry points are const
/// and safe to call concurrently.
class GameDefinition {
 public:
  /// Costs evaluated by finite differences unless block gradients are given.
  /// block_grads, if non-empty, must have one entry per player, each mapping
  /// the full joint vector to that player's own-block gradient.
  GameDefinition(Partition partition, std::vector<CostFn> costs,
                 std::vector<BlockGradFn> block_grads = {},
                 FieldJacobianFn field_jacobian = {});

  int n_players() const { return partition_.n_players(); }
  Index dim() const { return partition_.dim(); }
  const Partition& partition() const { return partition_; }
  GradientMode gradient_mode() const { return mode_; }

  double cost(int player, const Vector& joint) const;
  bool has_analytic_gradients() const { return mode_ == GradientMode::Analytic; }
  Vector block_gradient(int player, const Vector& joint) const;

  bool has_field_jacobian() const { return static_cast<bool>(field_jacobian_); }
  Matrix field_jacobian(const Vector& joint) const;

  const std::optional<AlignmentConflictSplit>& split() const { return split_; }
  void set_split(AlignmentConflictSplit split) { split_ = std::move(split); }

 private:
  Partition partition_;
  std::vector<CostFn> costs_;
  std::vector<BlockGradFn> block_grads_;
  FieldJacobianFn field_jacobian_;
  GradientMode mode_;
  std::optional<AlignmentConflictSplit> split_;
};

/// All players' costs at a joint point, index i = player i. Throws
/// NonFiniteValue naming the offending player on NaN/Inf.
Vector eval_costs(const GameDefinition& game, const JointParams& point);

/// The simultaneous-gradient field stacked in player order:
/// v(w) = (grad_{w_0} J_0, ..., grad_{w_{n-1}} J_{n-1}).
struct VectorFieldEval {
  Vector value;
  JointParams base_point;
};
VectorFieldEval pseudo_gradient(const GameDefinition& game, const JointParams& point);

/// Jacobian of the pseudo-gradient, H(w) = grad v(w). Asymmetric in general;
/// block (i, j) is the cross-derivative of player i's own-block gradient with
/// respect to player j's block. Uses the game's analytic Jacobian when one
/// was supplied, otherwise central differences of v.
struct GameJacobian {
  Matrix matrix;
  JointParams base_point;
};
GameJacobian game_hessian(const GameDefinition& game, const JointParams& point);

/// Structural class of the game at a point, read off the Jacobian of v.
enum class GameClass {
  Potential,          // H symmetric: the field is a single gradient
  PurelyAdversarial,  // H + H^T vanishes, or the spectrum is purely imaginary
  General,
};
GameClass classify_game(const GameJacobian& jac, double tol);
const char* to_string(GameClass c);

/// Split of the pseudo-gradient into the cooperative part driven by the
/// shared task loss and the adversarial part driven by the weighted
/// divergence. The two parts sum to v(w) exactly. Requires the game to carry
/// an AlignmentConflictSplit; throws UnsupportedGame otherwise.
struct CooperationCompetition {
  Vector potential_part;
  Vector adversarial_part;
};
CooperationCompetition decompose_cooperation_competition(const GameDefinition& game,
                                                         const JointParams& point);

/// Central-difference step for coordinate value x: h = cbrt(eps) * max(1, |x|).
double fd_step(double x);

/// v as a plain callback on raw joint vectors, for integrators.
std::function<Vector(const Vector&)> field_function(const GameDefinition& game);

}  // namespace gameopt
