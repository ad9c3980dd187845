// Copyright 2026 The TTFS-SSR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "ttfs/data.h"
#include "ttfs/network.h"
#include "ttfs/neuron.h"
#include "ttfs/objectives.h"
#include "ttfs/spikes.h"
#include "ttfs/training.h"

namespace ttfs {
namespace {

constexpr NeuronVariant kVariants[] = {NeuronVariant::kNonLeaky,
                                       NeuronVariant::kCurrentSynapse,
                                       NeuronVariant::kAlphaSynapse};

// Random inputs in [0, 8) with weights that fire the neuron inside the
// horizon most of the time.
struct SolverInput {
  std::vector<double> weights;
  SpikeVector spikes;
};

SolverInput RandomSolverInput(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> time(0.0, 8.0);
  std::normal_distribution<double> weight(0.5 / static_cast<double>(n),
                                          1.0 / static_cast<double>(n));
  SolverInput in{std::vector<double>(n), SpikeVector(n)};
  for (std::size_t i = 0; i < n; ++i) {
    in.weights[i] = weight(rng);
    in.spikes.Set(i, time(rng));
  }
  return in;
}

void BM_SolveFiringTime(benchmark::State& state) {
  const NeuronModelConfig model{kVariants[state.range(1)], 1.0, 1.0};
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const SolverInput in = RandomSolverInput(n, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        SolveFiringTime(model, in.weights, in.spikes, 16.0));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SolveFiringTime)
    ->ArgsProduct({{16, 256, 784}, {0, 1, 2}})
    ->ArgNames({"inputs", "variant"});

// One random 28x28 grayscale image with label 3.
RawDataset RandomImage(std::uint64_t seed) {
  RawDataset raw;
  raw.shape = {28, 28, 1};
  raw.num_classes = 10;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pixel(0, 255);
  raw.images.resize(784);
  for (std::uint8_t& p : raw.images) p = static_cast<std::uint8_t>(pixel(rng));
  raw.labels = {3};
  return raw;
}

// One 784-400-10 forward pass on a random image.
void BM_DenseForward(benchmark::State& state) {
  const NetworkSpec spec = NetworkSpec::Build(
      "784-400-10", {28, 28, 1}, 0,
      {kVariants[state.range(0)], 1.0, 1.0}, 16.0);
  const NetworkParams params = InitializeParams(spec, 8.0, 0);
  const RawDataset raw = RandomImage(3);
  const SpikeVector input = EncodedDataset(&raw, EncodeOptions{}).Get(0).input;
  for (auto _ : state) {
    benchmark::DoNotOptimize(NetworkForward(spec, params, input));
  }
}
BENCHMARK(BM_DenseForward)->DenseRange(0, 2)->ArgName("variant");

// Forward, cost and backward of one sample with the M-SSR regularizer on.
void BM_SampleGradient(benchmark::State& state) {
  const NetworkSpec spec = NetworkSpec::Build(
      "784-400-10", {28, 28, 1}, 0,
      {NeuronVariant::kNonLeaky, 1.0, 1.0}, 16.0);
  const NetworkParams params = InitializeParams(spec, 8.0, 0);
  const RawDataset raw = RandomImage(5);
  const EncodedDataset data(&raw, EncodeOptions{});
  CostConfig cost;
  cost.gamma2 = 1e-3;
  const std::vector<std::size_t> indices{0};
  for (auto _ : state) {
    GradientSet grads = ZerosLike(spec);
    benchmark::DoNotOptimize(
        BatchGradient(spec, params, data, indices, cost, 0, 1, &grads));
  }
}
BENCHMARK(BM_SampleGradient);

}  // namespace
}  // namespace ttfs

BENCHMARK_MAIN();
