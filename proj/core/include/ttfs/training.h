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

#ifndef TTFS_TRAINING_H_
#define TTFS_TRAINING_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ttfs/data.h"
#include "ttfs/network.h"
#include "ttfs/objectives.h"

namespace ttfs {

struct AdamState {
  NetworkParams m;
  NetworkParams v;
  std::uint64_t step = 0;
  double eta = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState For(const NetworkParams& params, double eta);
};

// One bias-corrected Adam update. Throws ContractViolation on shape mismatch.
void AdamStep(AdamState* state, NetworkParams* params,
              const GradientSet& grads);

struct TrainConfig {
  std::size_t batch_size = 128;
  int epochs = 20;
  std::uint64_t seed = 0;
  double eta = 1e-4;
  CostConfig cost;
  bool shuffle = true;
  int workers = 1;

  void Validate(double v_threshold) const;
};

struct MetricsRow {
  int epoch = 0;
  double train_cost = 0.0;
  double test_accuracy = 0.0;
  std::vector<double> layer_sparsity;  // hidden spiking layers
  double mean_sparsity = 0.0;
};

// Earliest output spike wins; unfired outputs count as `surrogate`; ties go
// to the lowest index.
std::size_t PredictClass(const SpikeVector& output, double surrogate);

// Accumulates the fraction of neurons firing strictly before t_ref.
class SparsityCounter {
 public:
  explicit SparsityCounter(const NetworkSpec& spec);
  void Add(const ForwardTrace& trace, double t_ref);
  void Merge(const SparsityCounter& other);
  // One value per spiking layer (pooling excluded), output layer last.
  std::vector<double> PerLayer() const;
  std::size_t samples() const { return samples_; }

 private:
  std::vector<std::size_t> layer_index_;
  std::vector<std::size_t> neurons_;
  std::vector<std::size_t> counts_;
  std::size_t samples_ = 0;
};

std::vector<double> Sparsity(const NetworkSpec& spec,
                             std::span<const ForwardTrace> traces,
                             double t_ref);

// Unweighted mean over hidden spiking layers.
double MeanHiddenSparsity(std::span<const double> per_layer);

struct EvalResult {
  double accuracy = 0.0;
  std::vector<double> layer_sparsity;  // every spiking layer
  std::vector<double> hidden_sparsity;
  double mean_hidden_sparsity = 0.0;
};

EvalResult Evaluate(const NetworkSpec& spec, const NetworkParams& params,
                    const EncodedDataset& data, double t_ref, int workers = 1);

struct TrainResult {
  NetworkParams params;
  std::vector<MetricsRow> metrics;
};

using EpochCallback = std::function<void(const MetricsRow&)>;
// Returns true to end training after the epoch it is given.
using StopPredicate = std::function<bool(const MetricsRow&)>;

// Mini-batch Adam on the cost of `config.cost`; batch gradient is the mean
// over samples. Metrics are evaluated on `test` after each epoch. Throws
// ContractViolation for an empty training set. Training ends early once
// `stop` returns true.
TrainResult Train(const NetworkSpec& spec, NetworkParams initial,
                  const EncodedDataset& train, const EncodedDataset& test,
                  const TrainConfig& config,
                  const EpochCallback& on_epoch = nullptr,
                  const StopPredicate& stop = nullptr);

// Adds the summed gradient of samples `indices` into `grads` and returns the
// summed cost. Work is split into `workers` contiguous chunks whose results
// are reduced in chunk order.
double BatchGradient(const NetworkSpec& spec, const NetworkParams& params,
                     const EncodedDataset& data,
                     std::span<const std::size_t> indices,
                     const CostConfig& cost, std::uint64_t augment_seed,
                     int workers, GradientSet* grads);

}  // namespace ttfs

#endif  // TTFS_TRAINING_H_
