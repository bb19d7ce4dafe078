// Serial reference kernel vs the OpenMP replicate kernel on one benchmark
// cell (K=16, sigma=0.25, squared loss, LMA/MA/ERM, R=200).

#include <benchmark/benchmark.h>

#include "mirror_agg/experiments.hpp"

using namespace mirror_agg;

namespace {

ExperimentConfig cell_config() {
  ExperimentConfig c;
  c.generator.family = GeneratorFamily::bounded_regression;
  c.generator.grid_size = 16;
  c.generator.noise_level = 0.25;
  c.generator.recipe = DictionaryRecipe::biased;
  c.n_grid = {512};
  c.m_grid = {32};
  c.replications = 200;
  c.algorithms = {Algorithm::LMA, Algorithm::MA, Algorithm::ERM};
  c.loss = LossSpec::squared();
  c.lma_betas = {4.0};
  c.seed = 20240601;
  return c;
}

const ExperimentConfig& config() {
  static const ExperimentConfig c = cell_config();
  return c;
}

const CellInstance& cell(std::size_t m) {
  static const CellInstance c2 = prepare_instance(config(), 2);
  static const CellInstance c32 = prepare_instance(config(), 32);
  return m == 2 ? c2 : c32;
}

void BM_serial(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(run_replicates_serial(config(), cell(m), n));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(config().replications));
}

void BM_parallel(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(run_replicates_parallel(config(), cell(m), n));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(config().replications));
}

}  // namespace

BENCHMARK(BM_serial)->Args({2, 128})->Args({32, 512})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_parallel)->Args({2, 128})->Args({32, 512})->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
