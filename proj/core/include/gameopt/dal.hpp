#pragma once

#include "gameopt/game.hpp"
#include "gameopt/types.hpp"

#include <cstdint>
#include <vector>

namespace gameopt {

/// Layer sizes of the three-network model. Defaults give a 283-parameter
/// model: extractor 2 -> 16 -> 8 with tanh after both layers, classifier
/// 8 -> 2 linear, domain head 8 -> 8 -> 1 with tanh hidden. Small enough
/// that the full game Jacobian is computable in tests.
struct DalArchitecture {
  Index input_dim = 2;
  Index hidden_dim = 16;
  Index feature_dim = 8;
  Index n_classes = 2;
  Index domain_hidden_dim = 8;

  Index classifier_dim() const { return n_classes * feature_dim + n_classes; }
  Index extractor_dim() const {
    return hidden_dim * input_dim + hidden_dim + feature_dim * hidden_dim + feature_dim;
  }
  Index domain_dim() const {
    return domain_hidden_dim * feature_dim + domain_hidden_dim + domain_hidden_dim + 1;
  }
  Index dim() const { return classifier_dim() + extractor_dim() + domain_dim(); }

  /// Player order: block 0 = classifier head, block 1 = feature extractor,
  /// block 2 = domain head.
  Partition partition() const;
};

/// The model: architecture, the two game coefficients, and a flat weight
/// vector laid out per DalArchitecture::partition(). Within each block,
/// weight matrices are stored column-major followed by their bias.
struct DalModel {
  DalArchitecture arch;
  double alpha = 1.0;   // divergence weight in the costs
  double lambda = 1.0;  // extractor's extra factor on the divergence
  Vector weights;

  /// Scaled-uniform init, U(-1/sqrt(fan_in), 1/sqrt(fan_in)) per layer,
  /// drawn in packing order from the given seed.
  static DalModel init(const DalArchitecture& arch, double alpha, double lambda,
                       std::uint64_t seed);
};

/// Outputs of the three networks on a batch X (rows = samples).
struct DalForward {
  Matrix features;      // batch x feature_dim
  Matrix class_logits;  // batch x n_classes
  Vector domain_logits; // batch
};
DalForward forward(const DalModel& model, const Matrix& x);

/// Synthetic 2-D transfer task: two Gaussian clusters labeled by cluster;
/// the target domain applies a rotation about the origin followed by a
/// shift to fresh draws from the same base streams.
struct TaskParams {
  Index n_per_domain = 100;        // training samples per domain
  Index n_eval_per_domain = 400;   // held-out samples per domain
  double cluster_separation = 2.0; // distance between the two class means
  double cluster_std = 0.45;       // isotropic within-cluster deviation
  double target_shift_x = 1.0;
  double target_shift_y = 0.5;
  double target_rotation = 0.35;   // radians
  std::uint64_t seed = 0;
};

struct TransferTask {
  Matrix source_x;                  // n x 2, labeled
  std::vector<int> source_y;
  Matrix target_x;                  // n x 2, labels withheld from training
  std::vector<int> target_y;        // evaluation only
  Matrix source_eval_x;
  std::vector<int> source_eval_y;
  Matrix target_eval_x;
  std::vector<int> target_eval_y;
  TaskParams params;
};

/// Deterministic for a fixed seed. The target base draws reuse the source
/// streams, so zero shift and zero rotation give target samples identical to
/// the source samples. Labels are balanced within one sample per split.
TransferTask make_task(const TaskParams& params);

/// Full-batch player costs (J_0, J_1, J_2):
///   task loss  = mean softmax cross-entropy of the classifier on source;
///   divergence = mean log sigma(t) over source + mean log(1 - sigma(t))
///                over target, t = domain logit (computed in the stable
///                log-sigmoid form, never sigma-then-log);
///   J_0 = task + alpha * divergence, J_1 = task + alpha * lambda * divergence,
///   J_2 = -alpha * divergence.
Vector dal_costs(const DalModel& model, const TransferTask& task);

/// Scalar pieces of the costs, for callers that need them separately.
struct DalLossTerms {
  double task_loss = 0.0;
  double divergence = 0.0;
};
DalLossTerms dal_loss_terms(const DalModel& model, const TransferTask& task);

/// Stacked per-player own-block gradients by manual backprop: block i comes
/// from a backward pass of player i's own cost J_i over one shared forward.
VectorFieldEval dal_pseudo_gradient(const DalModel& model, const TransferTask& task);

/// Gradient of player i's cost restricted to its own block.
Vector dal_player_gradient(const DalModel& model, const TransferTask& task, int player);

/// The same field computed the other way: one objective task - alpha *
/// divergence, with the backward factor -lambda spliced onto the divergence
/// path where it enters the extractor (the reversal-layer semantics). Kept
/// as a distinct code path so the equivalence with the stacked three-player
/// field is a real check, not a tautology.
Vector dal_grl_gradient(const DalModel& model, const TransferTask& task);

/// Gradients of the two scalar terms alone, each over the full joint vector
/// (task touches blocks 0 and 1; divergence touches blocks 1 and 2).
struct DalTermGradients {
  Vector task_loss;
  Vector divergence;
};
DalTermGradients dal_term_gradients(const DalModel& model, const TransferTask& task);

/// Accuracy of argmax(classifier(extractor(x))) on the held-out target split.
double transfer_accuracy(const DalModel& model, const TransferTask& task);
/// Same on the held-out source split.
double source_accuracy(const DalModel& model, const TransferTask& task);

/// The model/task pair as a GameDefinition over the weight vector, with
/// analytic block gradients and the task/divergence split attached (the
/// field Jacobian is left to finite differences of v). Copies of the task
/// and the model's coefficients are captured; the weight argument of every
/// evaluation is the joint point.
GameDefinition make_dal_game(const DalModel& model, const TransferTask& task);

/// Epoch-wise mini-batch index schedule with seeded shuffling. Batches are
/// consecutive slices of a per-epoch permutation; batch_size must divide the
/// split sizes so every epoch covers each sample exactly once (this makes
/// the epoch average of batch gradients equal the full-batch gradient).
class MinibatchSchedule {
 public:
  MinibatchSchedule(Index n_source, Index n_target, Index batch_size, std::uint64_t seed);

  struct Batch {
    std::vector<Index> source;
    std::vector<Index> target;
  };
  Batch next();

  Index batches_per_epoch() const { return n_source_ / batch_size_; }
  Index batch_size() const { return batch_size_; }

 private:
  void reshuffle();

  Index n_source_;
  Index n_target_;
  Index batch_size_;
  Index cursor_ = 0;  // batch index within the current epoch
  std::vector<Index> source_order_;
  std::vector<Index> target_order_;
  std::uint64_t epoch_ = 0;
  std::uint64_t seed_ = 0;
};

/// Pseudo-gradient of the costs restricted to a mini-batch of each domain.
Vector dal_batch_pseudo_gradient(const DalModel& model, const TransferTask& task,
                                 const MinibatchSchedule::Batch& batch);

}  // namespace gameopt
