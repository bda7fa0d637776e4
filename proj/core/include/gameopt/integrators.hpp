#pragma once

#include "gameopt/game.hpp"
#include "gameopt/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace gameopt {

/// Discrete update rules over a game vector field.
enum class Method {
  Euler,          // plain simultaneous gradient descent
  Nesterov,       // gradient descent with Nesterov momentum (look-ahead form)
  Adam,           // bias-corrected adaptive moments
  RK2,            // two-stage Runge-Kutta family, parameter rk_alpha in (0,1]
  RK4,            // classic four-stage Runge-Kutta
  ExtraGradient,  // field evaluated at a one-step look-ahead point
  Consensus,      // gradient step plus gamma-weighted descent on 0.5*||v||^2
};

/// Canonical lowercase names used in configs, CSV columns, and reports:
/// euler, nesterov, adam, rk2, rk4, eg, co.
const char* to_string(Method m);
Method parse_method(const std::string& name);  // throws ConfigError

/// Per-method shape parameters, bundled so signatures that are generic over
/// the method stay small. Fields irrelevant to a method are ignored.
struct StepParams {
  double rk_alpha = 0.5;  // RK2 family: 1/2 = Heun, 1 = midpoint, 2/3 = Ralston
  double mu = 0.9;        // Nesterov momentum
  double gamma = 0.0;     // Consensus penalty weight
  double beta1 = 0.9;     // Adam first-moment decay
  double beta2 = 0.999;   // Adam second-moment decay
  double eps_adam = 1e-8;
};

using FieldFn = std::function<Vector(const Vector&)>;

/// w+ = w - eta * v(w)
Vector step_euler(const FieldFn& v_eval, const Vector& w, double eta);

/// mid = w - (eta / (2 rk_alpha)) v(w);
/// w+  = w - eta ((1 - rk_alpha) v(w) + rk_alpha v(mid)), rk_alpha in (0,1].
Vector step_rk2(const FieldFn& v_eval, const Vector& w, double eta, double rk_alpha);

/// Classic four-stage rule on the descent field -v.
Vector step_rk4(const FieldFn& v_eval, const Vector& w, double eta);

/// w_half = w - eta v(w); w+ = w - eta v(w_half)
Vector step_extragradient(const FieldFn& v_eval, const Vector& w, double eta);

/// w+ = w - eta v(w) - gamma * Jv(w)^T v(w). The caller supplies the
/// transposed-Jacobian-vector product (analytic for quadratics, or central
/// differences of the scalar 0.5*||v||^2, which equals Jv^T v in the smooth
/// limit without ever forming the Jacobian).
using JtvFn = std::function<Vector(const Vector&)>;
Vector step_consensus(const FieldFn& v_eval, const JtvFn& jtv, const Vector& w, double eta,
                      double gamma);

/// Look-ahead momentum state. buffer starts at zero.
struct NesterovState {
  Vector point;
  Vector buffer;
};

/// buffer+ = mu * buffer - eta * v(point + mu * buffer); point+ = point + buffer+
NesterovState step_nesterov(const FieldFn& v_eval, const NesterovState& state, double eta,
                            double mu);

/// Adam moments. first/second start at zero, step_count at 0.
struct AdamState {
  Vector point;
  Vector first_moment;
  Vector second_moment;
  long step_count = 0;
};

/// Standard bias-corrected moment recursion applied to v in place of a
/// gradient.
AdamState step_adam(const FieldFn& v_eval, const AdamState& state, double eta, double beta1,
                    double beta2, double eps_adam);

/// Full integrator selection for a trajectory run.
struct IntegratorConfig {
  Method method = Method::Euler;
  double eta = 1e-2;
  StepParams params;
  long max_iters = 1000;
  double stop_grad_norm = 0.0;
  double divergence_threshold = 1e12;  // on the sup-norm of the iterate
  std::uint64_t seed = 0;

  /// Throws ConfigError on out-of-range fields (eta <= 0, rk_alpha outside
  /// (0,1], mu outside [0,1), gamma < 0, Adam betas outside [0,1), ...).
  void validate() const;
};

enum class TerminalStatus { Converged, MaxIters, Diverged };
const char* to_string(TerminalStatus s);

struct TrajectoryRecord {
  long iter = 0;
  double grad_norm = 0.0;            // ||v||_2 at this iterate
  std::vector<double> costs;         // J_1..J_n at this iterate
  std::vector<double> task_metrics;  // optional, e.g. accuracies
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;  // ordered by iter; last = final state
  TerminalStatus status = TerminalStatus::MaxIters;
  long iterations = 0;          // steps actually taken
  long field_evaluations = 0;   // total v(.) calls, look-aheads included
  Vector final_point;
  double final_grad_norm = 0.0;
};

/// Optional per-record metrics callback and recording stride.
struct RunOptions {
  long record_every = 1;
  std::function<std::vector<double>(const JointParams&)> metrics;
};

/// Iterates the configured rule from w0, recording every record_every
/// iterations plus the final state. Stops on ||v||_2 <= stop_grad_norm
/// (Converged), iteration budget (MaxIters), or ||w||_inf exceeding the
/// divergence threshold / any non-finite evaluation (Diverged; never an
/// exception). Deterministic given (game, w0, config).
Trajectory run_trajectory(const GameDefinition& game, const JointParams& w0,
                          const IntegratorConfig& config, const RunOptions& options = {});

}  // namespace gameopt
