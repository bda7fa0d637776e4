#include "gameopt/integrators.hpp"

#include <cmath>

namespace gameopt {

const char* to_string(Method m) {
  switch (m) {
    case Method::Euler: return "euler";
    case Method::Nesterov: return "nesterov";
    case Method::Adam: return "adam";
    case Method::RK2: return "rk2";
    case Method::RK4: return "rk4";
    case Method::ExtraGradient: return "eg";
    case Method::Consensus: return "co";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "euler") return Method::Euler;
  if (name == "nesterov" || name == "nm") return Method::Nesterov;
  if (name == "adam") return Method::Adam;
  if (name == "rk2") return Method::RK2;
  if (name == "rk4") return Method::RK4;
  if (name == "eg" || name == "extragradient") return Method::ExtraGradient;
  if (name == "co" || name == "consensus") return Method::Consensus;
  throw ConfigError("unknown method '" + name +
                    "' (expected euler, nesterov, adam, rk2, rk4, eg, or co)");
}

const char* to_string(TerminalStatus s) {
  switch (s) {
    case TerminalStatus::Converged: return "Converged";
    case TerminalStatus::MaxIters: return "MaxIters";
    case TerminalStatus::Diverged: return "Diverged";
  }
  return "unknown";
}

namespace {

void check_finite(const Vector& w, const char* rule) {
  if (!w.allFinite()) {
    throw NonFiniteValue(std::string(rule) + " step overflowed to non-finite values");
  }
}

// Step cores taking the already-evaluated field at the base point, so the
// trajectory runner's stopping-rule evaluation doubles as the first stage.
Vector euler_core(const Vector& w, const Vector& v0, double eta) { return w - eta * v0; }

Vector rk2_core(const FieldFn& v, const Vector& w, const Vector& v0, double eta,
                double rk_alpha) {
  const Vector mid = w - (eta / (2.0 * rk_alpha)) * v0;
  return w - eta * ((1.0 - rk_alpha) * v0 + rk_alpha * v(mid));
}

Vector rk4_core(const FieldFn& v, const Vector& w, const Vector& v1, double eta) {
  const Vector v2 = v(w - (eta / 2.0) * v1);
  const Vector v3 = v(w - (eta / 2.0) * v2);
  const Vector v4 = v(w - eta * v3);
  return w - (eta / 6.0) * (v1 + 2.0 * v2 + 2.0 * v3 + v4);
}

Vector eg_core(const FieldFn& v, const Vector& w, const Vector& v0, double eta) {
  const Vector half = w - eta * v0;
  return w - eta * v(half);
}

Vector consensus_core(const JtvFn& jtv, const Vector& w, const Vector& v0, double eta,
                      double gamma) {
  return w - eta * v0 - gamma * jtv(w);
}

}  // namespace

Vector step_euler(const FieldFn& v_eval, const Vector& w, double eta) {
  Vector out = euler_core(w, v_eval(w), eta);
  check_finite(out, "euler");
  return out;
}

Vector step_rk2(const FieldFn& v_eval, const Vector& w, double eta, double rk_alpha) {
  if (!(rk_alpha > 0.0 && rk_alpha <= 1.0)) {
    throw std::invalid_argument("step_rk2: rk_alpha must lie in (0, 1]");
  }
  Vector out = rk2_core(v_eval, w, v_eval(w), eta, rk_alpha);
  check_finite(out, "rk2");
  return out;
}

Vector step_rk4(const FieldFn& v_eval, const Vector& w, double eta) {
  Vector out = rk4_core(v_eval, w, v_eval(w), eta);
  check_finite(out, "rk4");
  return out;
}

Vector step_extragradient(const FieldFn& v_eval, const Vector& w, double eta) {
  Vector out = eg_core(v_eval, w, v_eval(w), eta);
  check_finite(out, "extragradient");
  return out;
}

Vector step_consensus(const FieldFn& v_eval, const JtvFn& jtv, const Vector& w, double eta,
                      double gamma) {
  Vector out = consensus_core(jtv, w, v_eval(w), eta, gamma);
  check_finite(out, "consensus");
  return out;
}

NesterovState step_nesterov(const FieldFn& v_eval, const NesterovState& state, double eta,
                            double mu) {
  if (!(mu >= 0.0 && mu < 1.0)) {
    throw std::invalid_argument("step_nesterov: mu must lie in [0, 1)");
  }
  NesterovState next;
  next.buffer = mu * state.buffer - eta * v_eval(state.point + mu * state.buffer);
  next.point = state.point + next.buffer;
  check_finite(next.point, "nesterov");
  return next;
}

AdamState step_adam(const FieldFn& v_eval, const AdamState& state, double eta, double beta1,
                    double beta2, double eps_adam) {
  const Vector g = v_eval(state.point);
  AdamState next;
  next.step_count = state.step_count + 1;
  next.first_moment = beta1 * state.first_moment + (1.0 - beta1) * g;
  next.second_moment = beta2 * state.second_moment + (1.0 - beta2) * g.cwiseProduct(g);
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(next.step_count));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(next.step_count));
  const Vector m_hat = next.first_moment / bc1;
  const Vector s_hat = next.second_moment / bc2;
  next.point =
      state.point - eta * (m_hat.array() / (s_hat.array().sqrt() + eps_adam)).matrix();
  check_finite(next.point, "adam");
  return next;
}

void IntegratorConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw ConfigError("integrator: eta must be a positive finite number");
  }
  if (!(params.rk_alpha > 0.0 && params.rk_alpha <= 1.0)) {
    throw ConfigError("integrator: rk_alpha must lie in (0, 1]");
  }
  if (!(params.mu >= 0.0 && params.mu < 1.0)) {
    throw ConfigError("integrator: mu must lie in [0, 1)");
  }
  if (!(params.gamma >= 0.0) || !std::isfinite(params.gamma)) {
    throw ConfigError("integrator: gamma must be >= 0");
  }
  if (!(params.beta1 >= 0.0 && params.beta1 < 1.0) ||
      !(params.beta2 >= 0.0 && params.beta2 < 1.0)) {
    throw ConfigError("integrator: adam betas must lie in [0, 1)");
  }
  if (!(params.eps_adam > 0.0)) {
    throw ConfigError("integrator: eps_adam must be > 0");
  }
  if (max_iters < 0) {
    throw ConfigError("integrator: max_iters must be >= 0");
  }
  if (!(stop_grad_norm >= 0.0)) {
    throw ConfigError("integrator: stop_grad_norm must be >= 0");
  }
  if (!(divergence_threshold > 0.0)) {
    throw ConfigError("integrator: divergence_threshold must be > 0");
  }
}

Trajectory run_trajectory(const GameDefinition& game, const JointParams& w0,
                          const IntegratorConfig& config, const RunOptions& options) {
  config.validate();
  if (options.record_every < 1) {
    throw ConfigError("run_trajectory: record_every must be >= 1");
  }
  if (w0.partition() != game.partition()) {
    throw std::invalid_argument("run_trajectory: initial point partition does not match game");
  }

  Trajectory traj;
  const FieldFn raw = field_function(game);
  const FieldFn v = [&raw, &traj](const Vector& w) {
    ++traj.field_evaluations;
    return raw(w);
  };

  // Consensus needs grad(0.5 ||v||^2) = (grad v)^T v: one Jacobian product
  // when the game has an analytic Jacobian, otherwise central differences of
  // the scalar (each probe costs a field evaluation, counted honestly).
  JtvFn jtv;
  if (config.method == Method::Consensus) {
    if (game.has_field_jacobian()) {
      jtv = [&game, &v](const Vector& w) -> Vector {
        return game.field_jacobian(w).transpose() * v(w);
      };
    } else {
      jtv = [&v](const Vector& w) -> Vector {
        Vector g(w.size());
        Vector probe = w;
        for (Index j = 0; j < w.size(); ++j) {
          const double saved = probe[j];
          const double h = fd_step(saved);
          probe[j] = saved + h;
          const double plus = 0.5 * v(probe).squaredNorm();
          probe[j] = saved - h;
          const double minus = 0.5 * v(probe).squaredNorm();
          probe[j] = saved;
          g[j] = (plus - minus) / (2.0 * h);
        }
        return g;
      };
    }
  }

  Vector w = w0.values();
  Vector buffer;   // Nesterov velocity
  Vector m1, m2;   // Adam moments
  long adam_steps = 0;
  if (config.method == Method::Nesterov) buffer = Vector::Zero(w.size());
  if (config.method == Method::Adam) {
    m1 = Vector::Zero(w.size());
    m2 = Vector::Zero(w.size());
  }

  const auto record = [&](long iter, double grad_norm, const Vector& point) {
    TrajectoryRecord r;
    r.iter = iter;
    r.grad_norm = grad_norm;
    r.costs.resize(static_cast<std::size_t>(game.n_players()));
    for (int i = 0; i < game.n_players(); ++i) {
      r.costs[static_cast<std::size_t>(i)] = game.cost(i, point);
    }
    if (options.metrics) {
      r.task_metrics = options.metrics(JointParams(point, game.partition()));
    }
    traj.records.push_back(std::move(r));
  };

  double grad_norm = std::numeric_limits<double>::quiet_NaN();
  traj.status = TerminalStatus::MaxIters;
  try {
    for (long iter = 0;; ++iter) {
      const Vector v_now = v(w);
      grad_norm = v_now.norm();

      TerminalStatus final_status = TerminalStatus::MaxIters;
      bool is_final = false;
      if (grad_norm <= config.stop_grad_norm) {
        final_status = TerminalStatus::Converged;
        is_final = true;
      } else if (iter >= config.max_iters) {
        final_status = TerminalStatus::MaxIters;
        is_final = true;
      }
      if (is_final || iter % options.record_every == 0) {
        record(iter, grad_norm, w);
      }
      if (is_final) {
        traj.status = final_status;
        traj.iterations = iter;
        break;
      }

      switch (config.method) {
        case Method::Euler:
          w = euler_core(w, v_now, config.eta);
          break;
        case Method::RK2:
          w = rk2_core(v, w, v_now, config.eta, config.params.rk_alpha);
          break;
        case Method::RK4:
          w = rk4_core(v, w, v_now, config.eta);
          break;
        case Method::ExtraGradient:
          w = eg_core(v, w, v_now, config.eta);
          break;
        case Method::Consensus:
          w = consensus_core(jtv, w, v_now, config.eta, config.params.gamma);
          break;
        case Method::Nesterov: {
          // The look-ahead point differs from w, so the monitoring value
          // cannot be reused here.
          buffer = config.params.mu * buffer -
                   config.eta * v(w + config.params.mu * buffer);
          w = w + buffer;
          break;
        }
        case Method::Adam: {
          ++adam_steps;
          m1 = config.params.beta1 * m1 + (1.0 - config.params.beta1) * v_now;
          m2 = config.params.beta2 * m2 +
               (1.0 - config.params.beta2) * v_now.cwiseProduct(v_now);
          const double bc1 =
              1.0 - std::pow(config.params.beta1, static_cast<double>(adam_steps));
          const double bc2 =
              1.0 - std::pow(config.params.beta2, static_cast<double>(adam_steps));
          w = w - config.eta * ((m1 / bc1).array() /
                                ((m2 / bc2).array().sqrt() + config.params.eps_adam))
                                   .matrix();
          break;
        }
      }

      if (!w.allFinite() || w.cwiseAbs().maxCoeff() > config.divergence_threshold) {
        traj.status = TerminalStatus::Diverged;
        traj.iterations = iter + 1;
        if (w.allFinite()) {
          // The iterate is still representable: close with a real record.
          try {
            const double gn = v(w).norm();
            if (std::isfinite(gn)) {
              record(iter + 1, gn, w);
              grad_norm = gn;
            }
          } catch (const NumericError&) {
          }
        }
        break;
      }
      traj.iterations = iter + 1;
    }
  } catch (const NumericError&) {
    // Divergence is an outcome, not an error: a cost/gradient overflow ends
    // the run with whatever was recorded so far.
    traj.status = TerminalStatus::Diverged;
  }

  traj.final_point = std::move(w);
  traj.final_grad_norm =
      traj.records.empty() ? grad_norm : traj.records.back().grad_norm;
  return traj;
}

}  // namespace gameopt
