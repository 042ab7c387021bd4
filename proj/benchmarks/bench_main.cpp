#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "dll/infer.hpp"
#include "dll/model.hpp"
#include "dll/synthetic.hpp"
#include "dll/train.hpp"

namespace {

dll::ModelConfig bench_model(dll::TaskKind task) {
  return dll::default_model_config(10, task, 7);
}

void TowerEval(benchmark::State& state) {
  const dll::ModelConfig config = bench_model(dll::TaskKind::Regression);
  const dll::DualTowerParams params = dll::init_dual_tower(config);
  const std::vector<double> x(10, 0.5);
  double y = 1.0;
  for (auto _ : state) {
    y = dll::f_eval(config, params, x, y);
    benchmark::DoNotOptimize(y);
  }
}
BENCHMARK(TowerEval);

void AlternateInference(benchmark::State& state) {
  const dll::ModelConfig config = bench_model(dll::TaskKind::Regression);
  const dll::DualTowerParams params = dll::init_dual_tower(config);
  const dll::Sample sample{std::vector<double>(10, 0.5), std::nullopt,
                           std::nullopt};
  dll::InferenceConfig inference;
  inference.y0 = 1.0;
  inference.iterations = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const auto result =
        dll::alternate_infer(sample, config, params, inference);
    benchmark::DoNotOptimize(result.y1.value);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(AlternateInference)->Arg(10)->Arg(100)->Arg(1000);

void TrainBatch(benchmark::State& state) {
  const dll::Dataset base = dll::gen_synthetic_regression(64, 10, 5);
  const dll::Dataset masked = dll::mask_labels(base, 0.3, 0.3, 5);
  const dll::ModelConfig config = bench_model(dll::TaskKind::Regression);
  dll::TrainConfig tc;
  tc.epochs = 1;
  tc.batch_size = 4;
  tc.learning_rate = 0.01;
  for (auto _ : state) {
    dll::DualTowerParams params = dll::init_dual_tower(config);
    const auto history = dll::train(masked, config, params, nullptr, tc);
    benchmark::DoNotOptimize(history.back().total());
  }
  state.SetItemsProcessed(state.iterations() * 16);  // batches per epoch
}
BENCHMARK(TrainBatch);

}  // namespace

BENCHMARK_MAIN();
