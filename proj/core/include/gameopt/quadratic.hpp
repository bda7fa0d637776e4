#pragma once

#include "gameopt/game.hpp"
#include "gameopt/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gameopt {

/// An n-player game with per-player quadratic costs
///   J_i(w) = 0.5 w^T Q_i w + b_i^T w,   Q_i symmetric,
/// over a shared partitioned vector w. The stacked own-block gradients give a
/// linear field v(w) = M w + m, where block row i of M comes from Q_i and
/// block i of m from b_i. Everything is closed form: these games are the
/// oracles the rest of the library is tested against.
class QuadraticGame {
 public:
  /// cost_offsets may be empty (all b_i = 0). Each Q_i must be symmetric;
  /// throws AsymmetricInput otherwise.
  QuadraticGame(Partition partition, std::vector<Matrix> cost_matrices,
                std::vector<Vector> cost_offsets = {});

  /// Three-player game with the alignment/conflict cost structure:
  /// J_0 = task + alpha * divergence, J_1 = task + alpha * lambda * divergence,
  /// J_2 = -alpha * divergence, with task = 0.5 w^T T w touching only blocks
  /// 0 and 1, and divergence = 0.5 w^T D w touching only blocks 1 and 2.
  /// The returned game carries the task/divergence split, so the
  /// cooperation/competition decomposition applies to it.
  static QuadraticGame alignment_conflict(const Partition& partition, const Matrix& task_matrix,
                                          const Matrix& divergence_matrix, double alpha,
                                          double lambda);

  int n_players() const { return partition_.n_players(); }
  Index dim() const { return partition_.dim(); }
  const Partition& partition() const { return partition_; }

  const Matrix& cost_matrix(int player) const;
  const Vector& cost_offset(int player) const;

  const Matrix& field_matrix() const { return field_matrix_; }  // M
  const Vector& field_offset() const { return field_offset_; }  // m

  double cost(int player, const Vector& w) const;
  Vector field(const Vector& w) const { return field_matrix_ * w + field_offset_; }

  JointParams origin() const { return JointParams(Vector::Zero(dim()), partition_); }
  JointParams point(Vector w) const { return JointParams(std::move(w), partition_); }

  /// Evaluable view with analytic block gradients and constant field
  /// Jacobian M. Carries the task/divergence split when built by
  /// alignment_conflict.
  GameDefinition as_game() const;

 private:
  Partition partition_;
  std::vector<Matrix> cost_matrices_;
  std::vector<Vector> cost_offsets_;
  Matrix field_matrix_;
  Vector field_offset_;

  struct SplitMatrices {
    Matrix task;
    Matrix divergence;
    double alpha = 1.0;
    double lambda = 1.0;
  };
  std::optional<SplitMatrices> split_;
};

/// Three players on R^3 sharing J(w) = 0.5 (w0^2 + 4 w0 w1 + w1^2 - w2^2):
/// players 0 and 1 minimize J, player 2 minimizes -J. Origin is an
/// equilibrium under the per-player view.
QuadraticGame make_example1_three_player();

/// Same costs, regrouped as two players: (w0, w1) jointly against w2. The
/// merged own-block Hessian is indefinite, so the origin is no longer an
/// equilibrium of the reduced game.
QuadraticGame make_example1_two_player();

/// Three single-coordinate players with task term w0^2 + 2 w0 w1 + w1^2 and
/// divergence term w1^2 + 99 w1 w2 - w2^2: a stiff rotational field whose
/// dynamics Jacobian has eigenvalues -2 and -3 +- 2i sqrt(2449).
QuadraticGame make_example2(double alpha = 1.0, double lambda = 1.0);

/// exp(-t M) w0: exact solution at time t of w' = -M w from w0, by
/// scaling-and-squaring matrix exponential. The integrator order oracle.
Vector exact_flow(const Matrix& field_matrix, const Vector& w0, double t);

/// Spectral shape of a generated random game's field matrix M.
enum class SpectralProfile {
  Symmetric,  // M = M^T: a potential game
  Skew,       // M = -M^T with zero diagonal blocks: purely adversarial
  Mixed,      // symmetric part with controlled positive spectrum + skew part
};

struct RandomQuadraticOptions {
  int n_players = 3;
  double real_min = 0.5;    // bounds for the symmetric part's eigenvalues
  double real_max = 2.0;    // (field matrix convention: positive = damping)
  double skew_scale = 1.0;  // magnitude of the rotational component
};

/// Random game realizable as per-player symmetric quadratic costs. The field
/// matrix is M = P + S with P = Q diag(uniform[real_min, real_max]) Q^T for a
/// random orthogonal Q, and S skew-symmetric with zeroed diagonal blocks
/// (scaled by skew_scale). Every real part of Sp(M) then lies inside
/// [real_min, real_max], so the dynamics -M are Hurwitz stable whenever
/// real_min > 0. Bit-reproducible for a fixed seed.
QuadraticGame make_random_quadratic(std::uint64_t seed, Index d_per_player,
                                    SpectralProfile profile,
                                    const RandomQuadraticOptions& options = {});

/// The named fixtures the CLI accepts: example1-3p, example1-2p, example2.
QuadraticGame make_named_quadratic(const std::string& name);  // throws ConfigError
bool is_named_quadratic(const std::string& name);

}  // namespace gameopt
