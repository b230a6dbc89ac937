#include <benchmark/benchmark.h>

#include <random>

#include "ewclab/analysis.hpp"
#include "ewclab/continual.hpp"
#include "ewclab/importance.hpp"
#include "ewclab/network.hpp"

namespace {

using namespace ewclab;

Matrix random_batch(std::size_t n, std::size_t d, std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix m(n, d);
  for (double& v : m.values()) v = u(gen);
  return m;
}

std::vector<std::uint8_t> random_labels(std::size_t n, std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::vector<std::uint8_t> y(n);
  for (auto& v : y) v = static_cast<std::uint8_t>(gen() % 10);
  return y;
}

void BM_Forward(benchmark::State& state) {
  const NetworkParams p = init_params(kDefaultArchitecture, 1);
  const Matrix x = random_batch(static_cast<std::size_t>(state.range(0)), 784, 2);
  for (auto _ : state) benchmark::DoNotOptimize(forward(p, x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Forward)->Arg(100)->Arg(1000);

void BM_ForwardBackward(benchmark::State& state) {
  const NetworkParams p = init_params(kDefaultArchitecture, 1);
  const Matrix x = random_batch(100, 784, 2);
  const auto y = random_labels(100, 3);
  for (auto _ : state) {
    const ForwardTrace trace = forward(p, x);
    benchmark::DoNotOptimize(backward(p, trace, Objective::kCrossEntropy, y));
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_ForwardBackward);

void BM_TrainEpoch(benchmark::State& state) {
  TaskDataset data;
  data.inputs = random_batch(2000, 784, 4);
  data.labels = random_labels(2000, 5);
  TrainConfig config;
  config.epochs = 1;
  for (auto _ : state) {
    NetworkParams p = init_params(kDefaultArchitecture, 1);
    SiAccumulator si(p);
    benchmark::DoNotOptimize(train_task(p, data, nullptr, AnchorState{}, config, si));
  }
  state.SetItemsProcessed(state.iterations() * 2000);
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

void BM_ComputeFis(benchmark::State& state) {
  const NetworkParams p = init_params(kDefaultArchitecture, 1);
  const Matrix x = random_batch(2000, 784, 6);
  const auto y = random_labels(2000, 7);
  for (auto _ : state) benchmark::DoNotOptimize(compute_fis(p, x, y));
  state.SetItemsProcessed(state.iterations() * 2000);
}
BENCHMARK(BM_ComputeFis)->Unit(benchmark::kMillisecond);

void BM_ComputeSig(benchmark::State& state) {
  const NetworkParams p = init_params(kDefaultArchitecture, 1);
  const Matrix x = random_batch(2000, 784, 6);
  for (auto _ : state) benchmark::DoNotOptimize(compute_sig(p, x));
  state.SetItemsProcessed(state.iterations() * 2000);
}
BENCHMARK(BM_ComputeSig)->Unit(benchmark::kMillisecond);

void BM_Pearson(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_batch(1, n, 8);
  const Matrix b = random_batch(1, n, 9);
  for (auto _ : state) benchmark::DoNotOptimize(pearson(a.values(), b.values()));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Pearson)->Arg(235200)->Arg(1500);

}  // namespace

BENCHMARK_MAIN();
