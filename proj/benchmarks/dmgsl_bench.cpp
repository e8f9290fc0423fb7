// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "dmgsl/contrast.hpp"
#include "dmgsl/graphops.hpp"
#include "dmgsl/trainer.hpp"

namespace {

using namespace dmgsl;

Tensor random_tensor(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng = substream(seed, "bench");
  Tensor t(r, c);
  for (double& v : t.values()) v = uniform(rng, -1.0, 1.0);
  return t;
}

void BM_Gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor a = random_tensor(n, n, 1), b = random_tensor(n, n, 2);
  Tensor c(n, n);
  for (auto _ : state) {
    kernels::gemm(a, false, b, false, c);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Gemm)->Arg(32)->Arg(82)->Arg(128)->Arg(256);

void BM_KnnSparsify(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor a = random_tensor(n, n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(graphops::knn_sparsify(a, 2));
}
BENCHMARK(BM_KnnSparsify)->Arg(82)->Arg(256);

void BM_NtXent(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor a = random_tensor(n, 16, 4), l = random_tensor(n, 16, 5);
  for (auto _ : state) {
    Tape tape;
    const Var loss = contrast::ntxent_loss(tape.constant(a), tape.variable(l), 0.5);
    tape.backward(loss);
    benchmark::DoNotOptimize(loss.value().item());
  }
}
BENCHMARK(BM_NtXent)->Arg(82)->Arg(256);

void BM_TrainerEpoch(benchmark::State& state) {
  data::SyntheticSpec spec;
  const auto ds = data::generate_synthetic(spec);
  TrainConfig config;
  config.use_hat = state.range(0) != 0;
  config.use_tat = state.range(1) != 0;
  trainer::Trainer model(ds.sequence, config);
  for (auto _ : state) benchmark::DoNotOptimize(model.run_epoch());
}
BENCHMARK(BM_TrainerEpoch)->Args({1, 1})->Args({0, 0})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
