#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gameopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Base class for configuration problems: malformed input files, out-of-range
/// options, refusing to clobber existing output. The CLI maps these to exit
/// code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Base class for numerical contract violations. The CLI maps these to exit
/// code 3. Divergence of a trajectory is deliberately NOT an error (it is a
/// terminal status); these exceptions signal that a quantity the caller asked
/// for does not exist or could not be computed to contract.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A cost or gradient evaluation produced NaN/Inf. Carries the player index
/// (0-based) when known, -1 otherwise.
class NonFiniteValue : public NumericError {
 public:
  NonFiniteValue(const std::string& what, int player = -1)
      : NumericError(what), player_(player) {}
  int player() const { return player_; }

 private:
  int player_;
};

/// A per-player quadratic block was singular (or not positive definite) where
/// a unique best response was required.
class SingularBlock : public NumericError {
 public:
  using NumericError::NumericError;
};

/// A matrix that must be symmetric for the requested operation was not.
class AsymmetricInput : public NumericError {
 public:
  using NumericError::NumericError;
};

/// The game lacks structure the operation needs (e.g. no task/divergence
/// split available for the cooperation/competition decomposition).
class UnsupportedGame : public NumericError {
 public:
  using NumericError::NumericError;
};

/// The requested update rule has no closed-form object of the requested kind
/// (e.g. no linear one-step amplification map exists for Adam).
class UnsupportedMethod : public NumericError {
 public:
  using NumericError::NumericError;
};

/// The spectrum has an eigenvalue in the closed right half plane, so the
/// requested stability quantity is undefined.
class NotHurwitz : public NumericError {
 public:
  using NumericError::NumericError;
};

/// An iterative numerical routine (eigensolver, matrix exponential) failed to
/// converge to its accuracy contract.
class ConvergenceFailure : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Half-open slice [offset, offset + length) of a stacked parameter vector.
struct Block {
  Index offset = 0;
  Index length = 0;
};

/// Ordered partition of the d coordinates of a stacked parameter vector into
/// contiguous per-player blocks. Blocks are non-empty, non-overlapping, and
/// cover [0, d) exactly in player order.
class Partition {
 public:
  Partition() = default;
  explicit Partition(const std::vector<Index>& lengths);

  int n_players() const { return static_cast<int>(blocks_.size()); }
  Index dim() const { return dim_; }
  const Block& block(int player) const;

  bool operator==(const Partition& other) const;
  bool operator!=(const Partition& other) const { return !(*this == other); }

 private:
  std::vector<Block> blocks_;
  Index dim_ = 0;
};

/// A point in joint strategy space together with the player structure that
/// gives its coordinates meaning.
class JointParams {
 public:
  JointParams(Vector values, Partition partition);

  Index dim() const { return values_.size(); }
  int n_players() const { return partition_.n_players(); }
  const Vector& values() const { return values_; }
  const Partition& partition() const { return partition_; }

  /// View of player i's block.
  Eigen::VectorBlock<const Vector> block(int player) const;

  /// Same partition, new coordinates. Throws if sizes disagree.
  JointParams with_values(Vector values) const;

 private:
  Vector values_;
  Partition partition_;
};

}  // namespace gameopt
