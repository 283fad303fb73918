/*
 * Copyright 2026 The pcmf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Microbenchmarks for the hot paths of a training run.

#include <benchmark/benchmark.h>

#include "pcmf/c2s.hpp"
#include "pcmf/persist.hpp"
#include "pcmf/prompt.hpp"
#include "pcmf/toy_world.hpp"
#include "pcmf/training.hpp"

namespace {

using namespace pcmf;

Matrix unit_rows(Eigen::Index rows, Eigen::Index d, std::uint64_t seed) {
  SeededRng rng(seed);
  Matrix m(rows, d);
  for (Eigen::Index r = 0; r < rows; ++r) {
    m.row(r) = sample_latent(rng, d).values().transpose();
    m.row(r) *= std::sqrt(static_cast<double>(d)) / m.row(r).norm();
  }
  return m;
}

// Args: width d, batch size.
void BM_C2SForwardEval(benchmark::State& state) {
  SeededRng init(1);
  const C2SNetwork net = build_c2s({static_cast<int>(state.range(0)), 5, 0.1}, init);
  const Matrix x = unit_rows(state.range(1), state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(c2s_forward(net, x));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_C2SForwardEval)->Args({16, 16})->Args({64, 16})->Args({512, 16});

void BM_C2SForwardBackwardTrain(benchmark::State& state) {
  SeededRng init(1);
  C2SNetwork net = build_c2s({static_cast<int>(state.range(0)), 5, 0.1}, init);
  const Matrix x = unit_rows(16, state.range(0), 2);
  const Matrix g = Matrix::Ones(16, state.range(0));
  SeededRng rng(3);
  for (auto _ : state) {
    const nn::Activations acts = nn::forward(net.net, x, nn::Mode::Train, rng);
    benchmark::DoNotOptimize(nn::backward(net.net, acts, g));
  }
}
BENCHMARK(BM_C2SForwardBackwardTrain)->Arg(16)->Arg(64);

// Whole training iterations, losses and Adam included, at the default toy size.
void BM_TrainIterations(benchmark::State& state) {
  const ToyWorld world{ToyWorldConfig{}};
  const PairDataset data = generate_pairs(world, 2000, 11);
  TrainConfig config;
  config.iterations = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    SeededRng init(config.init_seed);
    C2SNetwork net = build_c2s({16, 5, 0.1}, init);
    benchmark::DoNotOptimize(train(net, data, world, config));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainIterations)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_GeneratePairs(benchmark::State& state) {
  const ToyWorld world{ToyWorldConfig{}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_pairs(world, static_cast<std::size_t>(state.range(0)), 5));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GeneratePairs)->Arg(1000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_SetPrompt(benchmark::State& state) {
  const Matrix set = unit_rows(state.range(0), 512, 9);
  for (auto _ : state) benchmark::DoNotOptimize(compute_set_prompt(set, Modality::Image));
}
BENCHMARK(BM_SetPrompt)->Arg(10000);

void BM_CheckpointRoundTrip(benchmark::State& state) {
  SeededRng init(1);
  const C2SNetwork net = build_c2s({static_cast<int>(state.range(0)), 5, 0.1}, init);
  for (auto _ : state) benchmark::DoNotOptimize(decode_checkpoint(encode_checkpoint(net)));
}
BENCHMARK(BM_CheckpointRoundTrip)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
