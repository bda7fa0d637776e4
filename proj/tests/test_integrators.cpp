#include <cmath>

#include "doctest.h"
#include "gameopt/integrators.hpp"
#include "gameopt/quadratic.hpp"
#include "gameopt/rng.hpp"

using namespace gameopt;

namespace {

// scalar field v(w) = w: flow contracts toward 0, every step rule has a
// closed-form scalar factor
const FieldFn kIdentityField = [](const Vector& w) -> Vector { return w; };

GameDefinition scalar_game() {
  // J(w) = 0.5 w^2 for a single player: v(w) = w
  return GameDefinition(
      Partition({1}), {[](const Vector& w) { return 0.5 * w[0] * w[0]; }},
      {[](const Vector& w) -> Vector { return w; }},
      [](const Vector&) -> Matrix { return Matrix::Identity(1, 1); });
}

}  // namespace

TEST_CASE("method names round-trip and accept aliases") {
  for (Method m : {Method::Euler, Method::Nesterov, Method::Adam, Method::RK2, Method::RK4,
                   Method::ExtraGradient, Method::Consensus}) {
    CHECK(parse_method(to_string(m)) == m);
  }
  CHECK(parse_method("extragradient") == Method::ExtraGradient);
  CHECK(parse_method("consensus") == Method::Consensus);
  CHECK(parse_method("nm") == Method::Nesterov);
  CHECK_THROWS_AS(parse_method("sgd"), ConfigError);
}

TEST_CASE("scalar step factors") {
  Vector w(1);
  w << 1.0;
  const double eta = 0.25;

  CHECK(step_euler(kIdentityField, w, eta)[0] == doctest::Approx(1.0 - eta));
  // the whole two-stage family shares 1 - eta + eta^2/2 on linear fields
  for (double alpha : {0.5, 1.0, 2.0 / 3.0}) {
    CHECK(step_rk2(kIdentityField, w, eta, alpha)[0] ==
          doctest::Approx(1.0 - eta + 0.5 * eta * eta).epsilon(1e-14));
  }
  CHECK(step_rk4(kIdentityField, w, eta)[0] ==
        doctest::Approx(1.0 - eta + eta * eta / 2.0 - eta * eta * eta / 6.0 +
                        eta * eta * eta * eta / 24.0)
            .epsilon(1e-14));
  CHECK(step_extragradient(kIdentityField, w, eta)[0] ==
        doctest::Approx(1.0 - eta + eta * eta).epsilon(1e-14));

  const JtvFn jtv = [](const Vector& p) -> Vector { return p; };  // J = 1
  CHECK(step_consensus(kIdentityField, jtv, w, eta, 0.1)[0] ==
        doctest::Approx(1.0 - eta - 0.1).epsilon(1e-14));
}

TEST_CASE("nesterov look-ahead recurrence by hand") {
  Vector w(1);
  w << 1.0;
  const double eta = 0.1, mu = 0.5;
  NesterovState s{w, Vector::Zero(1)};

  // b1 = -eta * v(1)            = -0.1,  w1 = 0.9
  // b2 = mu*b1 - eta*v(0.9 + mu*b1) = -0.05 - 0.1*0.85 = -0.135, w2 = 0.765
  s = step_nesterov(kIdentityField, s, eta, mu);
  CHECK(s.point[0] == doctest::Approx(0.9));
  CHECK(s.buffer[0] == doctest::Approx(-0.1));
  s = step_nesterov(kIdentityField, s, eta, mu);
  CHECK(s.point[0] == doctest::Approx(0.765));
  CHECK(s.buffer[0] == doctest::Approx(-0.135));
}

TEST_CASE("adam first step moves by roughly eta regardless of gradient scale") {
  for (double scale : {1.0, 1e-4, 1e4}) {
    Vector w(1);
    w << scale;
    AdamState s{w, Vector::Zero(1), Vector::Zero(1), 0};
    const FieldFn v = [&](const Vector& p) -> Vector { return p; };
    const AdamState next = step_adam(v, s, 0.01, 0.9, 0.999, 1e-8);
    // bias-corrected m-hat / sqrt(v-hat) = sign(g) on the first step,
    // up to the eps_adam regularizer
    CHECK(next.point[0] == doctest::Approx(scale - 0.01).epsilon(1e-3));
    CHECK(next.step_count == 1);
  }
}

TEST_CASE("integrator config validation") {
  IntegratorConfig config;
  CHECK_NOTHROW(config.validate());

  IntegratorConfig bad = config;
  bad.eta = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = config;
  bad.max_iters = 0;  // degenerate but legal: record the initial state and stop
  CHECK_NOTHROW(bad.validate());
  bad.max_iters = -1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = config;
  bad.params.rk_alpha = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = config;
  bad.params.rk_alpha = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = config;
  bad.params.mu = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = config;
  bad.params.gamma = -0.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = config;
  bad.params.beta2 = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = config;
  bad.stop_grad_norm = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = config;
  bad.divergence_threshold = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("trajectory converges on a damped quadratic") {
  const QuadraticGame quad = make_random_quadratic(501, 2, SpectralProfile::Mixed);
  const GameDefinition game = quad.as_game();
  const JointParams w0(Vector::Ones(quad.dim()), quad.partition());

  IntegratorConfig config;
  config.method = Method::Euler;
  config.eta = 0.05;  // well under 2 * real_min / |spec|^2 for this family
  config.max_iters = 200000;
  config.stop_grad_norm = 1e-10;

  const Trajectory traj = run_trajectory(game, w0, config);
  CHECK(traj.status == TerminalStatus::Converged);
  CHECK(traj.final_grad_norm <= 1e-10);
  CHECK(traj.iterations > 10);
  CHECK(traj.records.back().iter == traj.iterations);
  // euler: one monitoring evaluation per iteration, nothing else
  CHECK(traj.field_evaluations == traj.iterations + 1);
}

TEST_CASE("field evaluation accounting per method") {
  const QuadraticGame quad = make_random_quadratic(502, 1, SpectralProfile::Mixed);
  const GameDefinition game = quad.as_game();
  const JointParams w0(Vector::Ones(quad.dim()), quad.partition());

  const long n = 7;
  const auto run = [&](Method method) {
    IntegratorConfig config;
    config.method = method;
    config.eta = 1e-3;
    config.max_iters = n;
    config.stop_grad_norm = 0.0;  // never satisfied: exercises the budget path
    if (method == Method::Consensus) config.params.gamma = 1e-4;
    return run_trajectory(game, w0, config);
  };

  CHECK(run(Method::Euler).field_evaluations == n + 1);
  CHECK(run(Method::RK2).field_evaluations == 2 * n + 1);
  CHECK(run(Method::RK4).field_evaluations == 4 * n + 1);
  CHECK(run(Method::ExtraGradient).field_evaluations == 2 * n + 1);
  CHECK(run(Method::Nesterov).field_evaluations == 2 * n + 1);
  CHECK(run(Method::Adam).field_evaluations == n + 1);
  // consensus with an analytic jacobian: one jtv product evaluates v once
  CHECK(run(Method::Consensus).field_evaluations == 2 * n + 1);
}

TEST_CASE("one trajectory step equals one step call") {
  const QuadraticGame quad = make_example2();
  const GameDefinition game = quad.as_game();
  Vector w(3);
  w << 0.3, -0.2, 0.4;
  const JointParams w0(w, quad.partition());

  IntegratorConfig config;
  config.method = Method::RK2;
  config.eta = 1e-4;
  config.max_iters = 1;
  const Trajectory traj = run_trajectory(game, w0, config);
  const Vector manual = step_rk2(field_function(game), w, config.eta, config.params.rk_alpha);
  CHECK(traj.final_point == manual);
}

TEST_CASE("starting at the equilibrium stops immediately") {
  const QuadraticGame quad = make_example2();
  IntegratorConfig config;
  config.method = Method::Nesterov;
  config.stop_grad_norm = 0.0;  // ||v|| = 0 exactly at the origin
  const Trajectory traj = run_trajectory(quad.as_game(), quad.origin(), config);
  CHECK(traj.status == TerminalStatus::Converged);
  CHECK(traj.iterations == 0);
  CHECK(traj.records.size() == 1);
}

TEST_CASE("divergence is a terminal status, not an exception") {
  const QuadraticGame quad = make_example2();
  const GameDefinition game = quad.as_game();
  const JointParams w0(Vector::Ones(3), quad.partition());

  IntegratorConfig config;
  config.method = Method::Euler;
  config.eta = 0.1;  // far beyond the stability threshold
  config.max_iters = 100000;
  config.divergence_threshold = 1e8;

  const Trajectory traj = run_trajectory(game, w0, config);
  CHECK(traj.status == TerminalStatus::Diverged);
  CHECK(traj.iterations < 1000);
  CHECK(traj.final_point.cwiseAbs().maxCoeff() > 1e8);
}

TEST_CASE("non-finite field values end the run as divergence") {
  const Partition partition({1});
  const GameDefinition game(
      partition, {[](const Vector& w) { return w[0] * w[0]; }},
      {[](const Vector& w) -> Vector {
        Vector g(1);
        g[0] = w[0] > 10.0 ? std::numeric_limits<double>::quiet_NaN() : -1.0;
        return g;
      }});
  IntegratorConfig config;
  config.method = Method::Euler;
  config.eta = 1.0;  // marches upward until the field turns NaN
  config.max_iters = 1000;
  const Trajectory traj =
      run_trajectory(game, JointParams(Vector::Zero(1), partition), config);
  CHECK(traj.status == TerminalStatus::Diverged);
}

TEST_CASE("recording stride keeps first, multiples, and final") {
  const QuadraticGame quad = make_random_quadratic(503, 1, SpectralProfile::Mixed);
  const GameDefinition game = quad.as_game();
  IntegratorConfig config;
  config.method = Method::Euler;
  config.eta = 0.01;
  config.max_iters = 10;
  RunOptions options;
  options.record_every = 4;
  const Trajectory traj = run_trajectory(
      game, JointParams(Vector::Ones(quad.dim()), quad.partition()), config, options);
  REQUIRE(traj.records.size() == 4);
  CHECK(traj.records[0].iter == 0);
  CHECK(traj.records[1].iter == 4);
  CHECK(traj.records[2].iter == 8);
  CHECK(traj.records[3].iter == 10);  // final state recorded exactly once
  for (const auto& r : traj.records) {
    CHECK(r.costs.size() == 3);
  }
}

TEST_CASE("metrics callback rides along with records") {
  const GameDefinition game = scalar_game();
  IntegratorConfig config;
  config.method = Method::Euler;
  config.eta = 0.5;
  config.max_iters = 3;
  RunOptions options;
  options.metrics = [](const JointParams& p) {
    return std::vector<double>{p.values()[0]};
  };
  const Trajectory traj =
      run_trajectory(game, JointParams(Vector::Ones(1), game.partition()), config, options);
  REQUIRE(traj.records.size() == 4);
  CHECK(traj.records[0].task_metrics[0] == doctest::Approx(1.0));
  CHECK(traj.records[1].task_metrics[0] == doctest::Approx(0.5));
  CHECK(traj.records[3].task_metrics[0] == doctest::Approx(0.125));
}

TEST_CASE("consensus falls back to differencing without an analytic jacobian") {
  // same costs, no jacobian: jtv comes from central differences of 0.5||v||^2
  const QuadraticGame quad = make_random_quadratic(504, 1, SpectralProfile::Mixed);
  const GameDefinition analytic = quad.as_game();
  std::vector<CostFn> costs;
  std::vector<BlockGradFn> grads;
  for (int i = 0; i < quad.n_players(); ++i) {
    costs.push_back([q = quad, i](const Vector& w) { return q.cost(i, w); });
    const Block b = quad.partition().block(i);
    grads.push_back([q = quad, b](const Vector& w) -> Vector {
      return q.field(w).segment(b.offset, b.length);
    });
  }
  const GameDefinition blind(quad.partition(), std::move(costs), std::move(grads));
  REQUIRE_FALSE(blind.has_field_jacobian());

  IntegratorConfig config;
  config.method = Method::Consensus;
  config.eta = 0.02;
  config.params.gamma = 0.01;
  config.max_iters = 50;
  const JointParams w0(Vector::Ones(quad.dim()), quad.partition());
  const Trajectory with_jac = run_trajectory(analytic, w0, config);
  const Trajectory with_fd = run_trajectory(blind, w0, config);
  CHECK((with_jac.final_point - with_fd.final_point).cwiseAbs().maxCoeff() < 1e-6);
  // FD jtv costs 2 * dim field evaluations per step
  CHECK(with_fd.field_evaluations > with_jac.field_evaluations);
}

TEST_CASE("runs are bitwise deterministic") {
  const QuadraticGame quad = make_random_quadratic(505, 2, SpectralProfile::Mixed);
  const GameDefinition game = quad.as_game();
  IntegratorConfig config;
  config.method = Method::RK4;
  config.eta = 0.03;
  config.max_iters = 200;
  const JointParams w0(Vector::Ones(quad.dim()), quad.partition());
  const Trajectory a = run_trajectory(game, w0, config);
  const Trajectory b = run_trajectory(game, w0, config);
  CHECK(a.final_point == b.final_point);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].grad_norm == b.records[i].grad_norm);
  }
}

TEST_CASE("trajectory rejects mismatched partitions and bad options") {
  const QuadraticGame quad = make_example2();
  const GameDefinition game = quad.as_game();
  IntegratorConfig config;
  CHECK_THROWS_AS(
      run_trajectory(game, JointParams(Vector::Zero(3), Partition({3})), config),
      std::invalid_argument);
  RunOptions options;
  options.record_every = 0;
  CHECK_THROWS_AS(run_trajectory(game, quad.origin(), config, options), ConfigError);
}
