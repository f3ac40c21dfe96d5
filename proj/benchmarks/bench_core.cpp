#include <benchmark/benchmark.h>

#include "lrncount/bracket.hpp"
#include "lrncount/lrn.hpp"
#include "lrncount/theorem.hpp"
#include "lrncount/training.hpp"

using namespace lrncount;

static void BM_FinalActivation(benchmark::State& state) {
  Rng rng(1);
  const auto seq = sample_random(static_cast<std::size_t>(state.range(0)), rng);
  const LrnParams p{0.9, -1.1, 0.99, 0.05};
  for (auto _ : state) benchmark::DoNotOptimize(final_activation(p, seq));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FinalActivation)->Arg(20)->Arg(50)->Arg(1000);

// Worst case: no counterexample, so every sequence up to max_len is visited.
static void BM_ExhaustiveSearch(benchmark::State& state) {
  const auto max_len = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(find_counterexample(LrnParams::canonical(), max_len));
  }
}
BENCHMARK(BM_ExhaustiveSearch)->Arg(8)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_Gradients(benchmark::State& state) {
  const auto task = state.range(0) ? Task::Ternary : Task::Binary;
  const auto batch = build_train_set(8);
  Rng rng(2);
  const auto model = init_model(task, BiasMode::WithBias, 0.5, rng);
  for (auto _ : state) benchmark::DoNotOptimize(gradients(model, batch));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch.size()));
}
BENCHMARK(BM_Gradients)->Arg(0)->Arg(1);

static void BM_TrainRun(benchmark::State& state) {
  TrainConfig c;
  c.train_length = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(train_run(c, 0));
}
BENCHMARK(BM_TrainRun)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
