#include <cmath>

#include "doctest.h"
#include "gameopt/quadratic.hpp"
#include "gameopt/rng.hpp"

#include <Eigen/Eigenvalues>

using namespace gameopt;

namespace {

Matrix sym3(double a11, double a12, double a13, double a22, double a23, double a33) {
  Matrix m(3, 3);
  m << a11, a12, a13, a12, a22, a23, a13, a23, a33;
  return m;
}

}  // namespace

TEST_CASE("quadratic game validates inputs") {
  const Partition p({1, 1});
  Matrix asym(2, 2);
  asym << 1.0, 2.0, 0.0, 1.0;
  CHECK_THROWS_AS(QuadraticGame(p, {asym, asym}), AsymmetricInput);

  Matrix ok = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(QuadraticGame(p, {ok}), std::invalid_argument);  // one cost, two players
  CHECK_THROWS_AS(QuadraticGame(p, {ok, Matrix::Identity(3, 3)}), std::invalid_argument);

  Matrix bad = ok;
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(QuadraticGame(p, {bad, ok}), NonFiniteValue);

  Vector long_offset = Vector::Zero(3);
  CHECK_THROWS_AS(QuadraticGame(p, {ok, ok}, {long_offset, Vector::Zero(2)}),
                  std::invalid_argument);
}

TEST_CASE("costs and field follow the quadratic form") {
  const Partition p({1, 2});
  const Matrix q0 = sym3(2.0, 1.0, 0.0, 4.0, -1.0, 3.0);
  const Matrix q1 = sym3(1.0, 0.0, 2.0, 5.0, 0.0, 2.0);
  Vector b0(3), b1(3);
  b0 << 1.0, 0.0, -1.0;
  b1 << 0.0, 2.0, 0.5;
  const QuadraticGame game(p, {q0, q1}, {b0, b1});

  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector w = rng.normal_vector(3);
    CHECK(game.cost(0, w) == doctest::Approx(0.5 * w.dot(q0 * w) + b0.dot(w)).epsilon(1e-12));
    CHECK(game.cost(1, w) == doctest::Approx(0.5 * w.dot(q1 * w) + b1.dot(w)).epsilon(1e-12));

    // field = stacked own-block gradients
    Vector expected(3);
    expected[0] = (q0 * w + b0)[0];
    expected.segment(1, 2) = (q1 * w + b1).segment(1, 2);
    CHECK((game.field(w) - expected).cwiseAbs().maxCoeff() < 1e-13);
  }

  // field matrix rows mirror the per-player cost rows
  CHECK(game.field_matrix().row(0) == q0.row(0));
  CHECK(game.field_matrix().row(1) == q1.row(1));
  CHECK(game.field_matrix().row(2) == q1.row(2));
}

TEST_CASE("as_game exposes analytic gradients and constant jacobian") {
  const QuadraticGame quad = make_example2();
  const GameDefinition game = quad.as_game();
  CHECK(game.gradient_mode() == GradientMode::Analytic);
  REQUIRE(game.has_field_jacobian());

  Rng rng(19);
  const Vector w = rng.normal_vector(3);
  const JointParams point(w, game.partition());
  CHECK((pseudo_gradient(game, point).value - quad.field(w)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(game.field_jacobian(w) == quad.field_matrix());
  for (int i = 0; i < 3; ++i) {
    CHECK(game.cost(i, w) == quad.cost(i, w));
  }
}

TEST_CASE("example1 three-player fixture") {
  const QuadraticGame game = make_example1_three_player();
  CHECK(game.n_players() == 3);
  CHECK(game.dim() == 3);

  Vector ones = Vector::Ones(3);
  Vector v = game.field(ones);
  CHECK(v[0] == 3.0);
  CHECK(v[1] == 3.0);
  CHECK(v[2] == 1.0);

  // shared cost at the classic falsifying deviation
  Vector w(3);
  w << -1.0, 1.0, 0.0;
  CHECK(game.cost(0, w) == doctest::Approx(-1.0));
  CHECK(game.cost(2, w) == doctest::Approx(1.0));  // third player pays -J

  Matrix h = game.field_matrix();
  CHECK(h(0, 0) == 1.0);
  CHECK(h(0, 1) == 2.0);
  CHECK(h(2, 2) == 1.0);  // sign flip: player 2 minimizes -J
  CHECK(h == h.transpose());
}

TEST_CASE("example1 two-player regrouping changes the own-block structure") {
  const QuadraticGame game = make_example1_two_player();
  CHECK(game.n_players() == 2);
  CHECK(game.partition() == Partition({2, 1}));

  // merged block [[1,2],[2,1]] is indefinite: eigenvalues 3 and -1
  const Matrix own = game.cost_matrix(0).block(0, 0, 2, 2);
  Eigen::SelfAdjointEigenSolver<Matrix> es(own);
  CHECK(es.eigenvalues()[0] == doctest::Approx(-1.0));
  CHECK(es.eigenvalues()[1] == doctest::Approx(3.0));

  // same shared field as the three-player grouping
  const QuadraticGame three = make_example1_three_player();
  Rng rng(23);
  const Vector w = rng.normal_vector(3);
  CHECK((game.field(w) - three.field(w)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("example2 fixture matches its closed forms") {
  const QuadraticGame game = make_example2();
  Vector ones = Vector::Ones(3);
  const Vector v = game.field(ones);
  CHECK(v[0] == 4.0);
  CHECK(v[1] == 105.0);
  CHECK(v[2] == -97.0);

  Vector e0(3);
  e0 << 1.0, 0.0, 0.0;
  CHECK(game.cost(0, e0) == doctest::Approx(1.0));
  CHECK(game.cost(1, e0) == doctest::Approx(1.0));
  CHECK(game.cost(2, e0) == doctest::Approx(0.0));

  const Matrix m = game.field_matrix();
  CHECK(m(1, 2) == 99.0);
  CHECK(m(2, 1) == -99.0);  // player 2 fights the divergence
  CHECK(m.trace() == doctest::Approx(8.0));
}

TEST_CASE("example2 scales with alpha and lambda") {
  const double alpha = 2.0, lambda = 0.25;
  const QuadraticGame game = make_example2(alpha, lambda);
  const QuadraticGame base = make_example2();
  Rng rng(29);
  const Vector w = rng.normal_vector(3);

  // task gradient part is shared; divergence part scales per player
  const QuadraticGame task_only = make_example2(0.0, 1.0);
  const Vector v_task = task_only.field(w);
  const Vector v_base_div = base.field(w) - v_task;
  const Vector v = game.field(w);
  CHECK(std::abs(v[0] - (v_task[0] + alpha * v_base_div[0])) < 1e-12);
  CHECK(std::abs(v[1] - (v_task[1] + alpha * lambda * v_base_div[1])) < 1e-12);
  CHECK(std::abs(v[2] - (v_task[2] + alpha * v_base_div[2])) < 1e-12);
}

TEST_CASE("alignment_conflict rejects terms touching the wrong blocks") {
  const Partition p({1, 1, 1});
  const Matrix task = sym3(2.0, 2.0, 0.0, 2.0, 0.0, 0.0);
  const Matrix divergence = sym3(0.0, 0.0, 0.0, 2.0, 99.0, -2.0);

  CHECK_NOTHROW(QuadraticGame::alignment_conflict(p, task, divergence, 1.0, 1.0));

  Matrix bad_task = task;
  bad_task(2, 2) = 1.0;  // task must not touch the domain block
  CHECK_THROWS_AS(QuadraticGame::alignment_conflict(p, bad_task, divergence, 1.0, 1.0),
                  std::invalid_argument);

  Matrix bad_div = divergence;
  bad_div(0, 1) = bad_div(1, 0) = 1.0;  // divergence must not touch the classifier block
  CHECK_THROWS_AS(QuadraticGame::alignment_conflict(p, task, bad_div, 1.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("exact flow satisfies the semigroup property and the ODE at t=0") {
  Rng rng(37);
  const QuadraticGame game = make_random_quadratic(101, 2, SpectralProfile::Mixed);
  const Matrix m = game.field_matrix();
  const Vector w0 = rng.normal_vector(m.rows());

  const Vector w_a = exact_flow(m, w0, 0.3);
  const Vector w_ab = exact_flow(m, w_a, 0.5);
  const Vector w_direct = exact_flow(m, w0, 0.8);
  CHECK((w_ab - w_direct).cwiseAbs().maxCoeff() <
        1e-10 * std::max(1.0, w_direct.cwiseAbs().maxCoeff()));

  CHECK((exact_flow(m, w0, 0.0) - w0).cwiseAbs().maxCoeff() == 0.0);

  // d/dt at 0 is -M w0
  const double h = 1e-7;
  const Vector deriv = (exact_flow(m, w0, h) - exact_flow(m, w0, -h)) / (2.0 * h);
  CHECK((deriv + m * w0).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("random quadratic games are realizable and spectrally boxed") {
  RandomQuadraticOptions options;
  options.n_players = 3;
  options.real_min = 0.5;
  options.real_max = 2.0;

  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
    const QuadraticGame game = make_random_quadratic(seed, 2, SpectralProfile::Mixed, options);
    const Matrix m = game.field_matrix();

    // realizability: the own-block rows of the symmetric per-player costs
    // reassemble the field matrix exactly
    for (int i = 0; i < game.n_players(); ++i) {
      const Matrix& q = game.cost_matrix(i);
      CHECK(q == q.transpose());  // bitwise by construction
      const Block b = game.partition().block(i);
      CHECK(q.middleRows(b.offset, b.length) == m.middleRows(b.offset, b.length));
    }

    // the symmetric part carries the prescribed spectrum box
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
    CHECK(es.eigenvalues().minCoeff() >= options.real_min - 1e-10);
    CHECK(es.eigenvalues().maxCoeff() <= options.real_max + 1e-10);
  }
}

TEST_CASE("random quadratic spectral profiles") {
  const QuadraticGame sym_game = make_random_quadratic(7, 2, SpectralProfile::Symmetric);
  const Matrix ms = sym_game.field_matrix();
  CHECK((ms - ms.transpose()).cwiseAbs().maxCoeff() == 0.0);

  const QuadraticGame skew_game = make_random_quadratic(7, 2, SpectralProfile::Skew);
  const Matrix mk = skew_game.field_matrix();
  CHECK((mk + mk.transpose()).cwiseAbs().maxCoeff() == 0.0);
  // own blocks vanish: realizable as pure cross-coupling costs
  for (int i = 0; i < skew_game.n_players(); ++i) {
    const Block b = skew_game.partition().block(i);
    CHECK(mk.block(b.offset, b.offset, b.length, b.length).cwiseAbs().maxCoeff() == 0.0);
  }

  // reproducibility and seed sensitivity
  const QuadraticGame again = make_random_quadratic(7, 2, SpectralProfile::Skew);
  CHECK(again.field_matrix() == mk);
  const QuadraticGame other = make_random_quadratic(8, 2, SpectralProfile::Skew);
  CHECK(other.field_matrix() != mk);
}

TEST_CASE("named game lookup") {
  CHECK(is_named_quadratic("example1-3p"));
  CHECK(is_named_quadratic("example1-2p"));
  CHECK(is_named_quadratic("example2"));
  CHECK_FALSE(is_named_quadratic("example3"));
  CHECK_FALSE(is_named_quadratic("dal"));
  CHECK(make_named_quadratic("example2").n_players() == 3);
  CHECK_THROWS_AS(make_named_quadratic("nope"), ConfigError);
}

TEST_CASE("random quadratic rejects degenerate requests") {
  CHECK_THROWS_AS(make_random_quadratic(1, 0, SpectralProfile::Mixed), std::invalid_argument);
  RandomQuadraticOptions options;
  options.n_players = 1;
  CHECK_THROWS_AS(make_random_quadratic(1, 2, SpectralProfile::Mixed, options),
                  std::invalid_argument);
  options.n_players = 2;
  options.real_min = 3.0;  // inverted box
  CHECK_THROWS_AS(make_random_quadratic(1, 2, SpectralProfile::Mixed, options),
                  std::invalid_argument);
}
