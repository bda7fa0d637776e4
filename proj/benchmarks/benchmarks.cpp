// Microbenchmarks for the hot paths: field evaluation, stepping, spectra,
// matrix exponentials, and the DAL backprop. Sizes mirror realistic use
// (quadratic games around d=60, the 283-parameter training game).
#include <benchmark/benchmark.h>

#include "gameopt/dal.hpp"
#include "gameopt/game.hpp"
#include "gameopt/integrators.hpp"
#include "gameopt/quadratic.hpp"
#include "gameopt/rng.hpp"
#include "gameopt/stability.hpp"

namespace {

using namespace gameopt;

const QuadraticGame& quad60() {
  static const QuadraticGame game =
      make_random_quadratic(7, 20, SpectralProfile::Mixed);  // 3 players x 20
  return game;
}

void BM_quadratic_field_d60(benchmark::State& state) {
  const QuadraticGame& game = quad60();
  Rng rng(1);
  const Vector w = rng.normal_vector(game.dim());
  for (auto _ : state) {
    benchmark::DoNotOptimize(game.field(w));
  }
}
BENCHMARK(BM_quadratic_field_d60);

void BM_pseudo_gradient_view_d60(benchmark::State& state) {
  const GameDefinition view = quad60().as_game();
  Rng rng(2);
  const JointParams point(rng.normal_vector(view.dim()), view.partition());
  for (auto _ : state) {
    benchmark::DoNotOptimize(pseudo_gradient(view, point).value);
  }
}
BENCHMARK(BM_pseudo_gradient_view_d60);

void BM_step_rk4_d60(benchmark::State& state) {
  const QuadraticGame& game = quad60();
  const FieldFn field = [&game](const Vector& w) { return game.field(w); };
  Rng rng(3);
  const Vector w = rng.normal_vector(game.dim());
  for (auto _ : state) {
    benchmark::DoNotOptimize(step_rk4(field, w, 1e-3));
  }
}
BENCHMARK(BM_step_rk4_d60);

void BM_dal_backprop(benchmark::State& state) {
  static const TransferTask task = make_task(TaskParams{});  // 100 per domain
  static const DalModel model = DalModel::init(DalArchitecture{}, 1.0, 1.0, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dal_pseudo_gradient(model, task).value);
  }
}
BENCHMARK(BM_dal_backprop);

void BM_dal_game_hessian_fd(benchmark::State& state) {
  // 2 * 283 field evaluations by central differences
  static const TransferTask task = [] {
    TaskParams params;
    params.n_per_domain = 16;
    params.n_eval_per_domain = 16;
    params.seed = 2;
    return make_task(params);
  }();
  static const DalModel model = DalModel::init(DalArchitecture{}, 1.0, 1.0, 6);
  static const GameDefinition game = make_dal_game(model, task);
  const JointParams point(model.weights, game.partition());
  for (auto _ : state) {
    benchmark::DoNotOptimize(game_hessian(game, point).matrix);
  }
}
BENCHMARK(BM_dal_game_hessian_fd);

void BM_dense_spectrum_d100(benchmark::State& state) {
  Rng rng(8);
  const Matrix m = rng.normal_matrix(100, 100);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dense_spectrum(m));
  }
}
BENCHMARK(BM_dense_spectrum_d100);

void BM_exact_flow_d60(benchmark::State& state) {
  const Matrix& m = quad60().field_matrix();
  Rng rng(9);
  const Vector w0 = rng.normal_vector(m.rows());
  for (auto _ : state) {
    benchmark::DoNotOptimize(exact_flow(m, w0, 1.0));
  }
}
BENCHMARK(BM_exact_flow_d60);

}  // namespace

BENCHMARK_MAIN();
