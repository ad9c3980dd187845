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

#include "ttfs/training.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>
#include <variant>

#include "ttfs/error.h"

namespace ttfs {
namespace {

void AddInto(GradientSet* dst, const GradientSet& src) {
  for (std::size_t l = 0; l < dst->layers.size(); ++l) {
    auto& d = dst->layers[l];
    const auto& s = src.layers[l];
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
  }
}

std::uint64_t SampleSeed(std::uint64_t base, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(base),
                    static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(std::uint64_t{index} >> 32)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (std::uint64_t{words[0]} << 32) | words[1];
}

// Runs fn(chunk, begin, end) over `workers` contiguous chunks of [0, n).
template <typename Fn>
void ParallelChunks(std::size_t n, int workers, Fn&& fn) {
  const std::size_t chunks =
      std::max<std::size_t>(1, std::min<std::size_t>(workers, n));
  if (chunks == 1) {
    fn(0, 0, n);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t begin = n * c / chunks;
    const std::size_t end = n * (c + 1) / chunks;
    threads.emplace_back([&fn, c, begin, end] { fn(c, begin, end); });
  }
  for (auto& t : threads) t.join();
}

}  // namespace

AdamState AdamState::For(const NetworkParams& params, double eta) {
  Require(std::isfinite(eta) && eta >= 0.0, "learning rate must be >= 0");
  AdamState s;
  s.eta = eta;
  s.m.layers.resize(params.layers.size());
  s.v.layers.resize(params.layers.size());
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    s.m.layers[l].assign(params.layers[l].size(), 0.0);
    s.v.layers[l].assign(params.layers[l].size(), 0.0);
  }
  return s;
}

void AdamStep(AdamState* state, NetworkParams* params,
              const GradientSet& grads) {
  Require(state != nullptr && params != nullptr, "null Adam operand");
  const std::size_t layers = params->layers.size();
  Require(grads.layers.size() == layers && state->m.layers.size() == layers &&
              state->v.layers.size() == layers,
          "Adam state, parameters and gradients differ in layer count");
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t n = params->layers[l].size();
    Require(grads.layers[l].size() == n && state->m.layers[l].size() == n &&
                state->v.layers[l].size() == n,
            "Adam state, parameters and gradients differ in shape");
  }
  ++state->step;
  const double step = static_cast<double>(state->step);
  const double c1 = 1.0 - std::pow(state->beta1, step);
  const double c2 = 1.0 - std::pow(state->beta2, step);
  for (std::size_t l = 0; l < layers; ++l) {
    auto& theta = params->layers[l];
    auto& m = state->m.layers[l];
    auto& v = state->v.layers[l];
    const auto& g = grads.layers[l];
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = state->beta1 * m[i] + (1.0 - state->beta1) * g[i];
      v[i] = state->beta2 * v[i] + (1.0 - state->beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      theta[i] -= state->eta * m_hat / (std::sqrt(v_hat) + state->eps);
    }
  }
}

void TrainConfig::Validate(double v_threshold) const {
  Require(batch_size >= 1, "batch_size must be >= 1");
  Require(epochs >= 1, "epochs must be >= 1");
  Require(workers >= 1, "workers must be >= 1");
  Require(std::isfinite(eta) && eta >= 0.0, "eta must be >= 0");
  cost.Validate(v_threshold);
}

std::size_t PredictClass(const SpikeVector& output, double surrogate) {
  std::size_t best = 0;
  double best_time = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < output.size(); ++i) {
    const double t = output.fired(i) ? output.time(i) : surrogate;
    if (t < best_time) {
      best_time = t;
      best = i;
    }
  }
  return best;
}

SparsityCounter::SparsityCounter(const NetworkSpec& spec)
    : layer_index_(spec.SpikingLayers()) {
  for (std::size_t l : layer_index_) {
    neurons_.push_back(OutputSize(spec.layers[l]));
  }
  counts_.assign(layer_index_.size(), 0);
}

void SparsityCounter::Add(const ForwardTrace& trace, double t_ref) {
  for (std::size_t k = 0; k < layer_index_.size(); ++k) {
    const auto& st = std::get<SpikingLayerTrace>(trace.layers[layer_index_[k]]);
    for (std::size_t i = 0; i < st.output.size(); ++i) {
      if (st.output.fired(i) && st.output.time(i) < t_ref) ++counts_[k];
    }
  }
  ++samples_;
}

void SparsityCounter::Merge(const SparsityCounter& other) {
  Require(other.counts_.size() == counts_.size(),
          "sparsity counters belong to different networks");
  for (std::size_t k = 0; k < counts_.size(); ++k) {
    counts_[k] += other.counts_[k];
  }
  samples_ += other.samples_;
}

std::vector<double> SparsityCounter::PerLayer() const {
  std::vector<double> out(counts_.size(), 0.0);
  if (samples_ == 0) return out;
  for (std::size_t k = 0; k < counts_.size(); ++k) {
    out[k] = static_cast<double>(counts_[k]) /
             (static_cast<double>(neurons_[k]) * static_cast<double>(samples_));
  }
  return out;
}

std::vector<double> Sparsity(const NetworkSpec& spec,
                             std::span<const ForwardTrace> traces,
                             double t_ref) {
  SparsityCounter counter(spec);
  for (const ForwardTrace& t : traces) counter.Add(t, t_ref);
  return counter.PerLayer();
}

double MeanHiddenSparsity(std::span<const double> per_layer) {
  if (per_layer.empty()) return 0.0;
  return std::accumulate(per_layer.begin(), per_layer.end(), 0.0) /
         static_cast<double>(per_layer.size());
}

EvalResult Evaluate(const NetworkSpec& spec, const NetworkParams& params,
                    const EncodedDataset& data, double t_ref, int workers) {
  Require(data.size() > 0, "evaluation set is empty");
  const std::size_t chunks = std::max<std::size_t>(
      1, std::min<std::size_t>(std::max(workers, 1), data.size()));
  std::vector<SparsityCounter> counters(chunks, SparsityCounter(spec));
  std::vector<std::size_t> correct(chunks, 0);
  ParallelChunks(data.size(), static_cast<int>(chunks),
                 [&](std::size_t c, std::size_t begin, std::size_t end) {
                   for (std::size_t i = begin; i < end; ++i) {
                     const EncodedSample s = data.Get(i);
                     const ForwardTrace trace =
                         NetworkForward(spec, params, s.input);
                     counters[c].Add(trace, t_ref);
                     if (PredictClass(trace.output(), 2.0 * t_ref) ==
                         static_cast<std::size_t>(s.label)) {
                       ++correct[c];
                     }
                   }
                 });
  for (std::size_t c = 1; c < chunks; ++c) counters[0].Merge(counters[c]);
  EvalResult out;
  out.accuracy = static_cast<double>(std::accumulate(correct.begin(),
                                                     correct.end(),
                                                     std::size_t{0})) /
                 static_cast<double>(data.size());
  out.layer_sparsity = counters[0].PerLayer();
  out.hidden_sparsity.assign(out.layer_sparsity.begin(),
                             out.layer_sparsity.end() - 1);
  out.mean_hidden_sparsity = MeanHiddenSparsity(out.hidden_sparsity);
  return out;
}

double BatchGradient(const NetworkSpec& spec, const NetworkParams& params,
                     const EncodedDataset& data,
                     std::span<const std::size_t> indices,
                     const CostConfig& cost, std::uint64_t augment_seed,
                     int workers, GradientSet* grads) {
  Require(grads != nullptr, "gradient destination must not be null");
  const std::size_t chunks = std::max<std::size_t>(
      1, std::min<std::size_t>(std::max(workers, 1), indices.size()));
  std::vector<GradientSet> partial;
  if (chunks > 1) partial.assign(chunks, ZerosLike(spec));
  std::vector<double> costs(chunks, 0.0);
  ParallelChunks(indices.size(), static_cast<int>(chunks),
                 [&](std::size_t c, std::size_t begin, std::size_t end) {
                   GradientSet* g = chunks > 1 ? &partial[c] : grads;
                   for (std::size_t k = begin; k < end; ++k) {
                     const std::size_t i = indices[k];
                     std::mt19937_64 rng(SampleSeed(augment_seed, i));
                     const EncodedSample s = data.Get(i, &rng);
                     const ForwardTrace trace =
                         NetworkForward(spec, params, s.input);
                     costs[c] += TotalCost(spec, params, trace,
                                           static_cast<std::size_t>(s.label),
                                           cost, g)
                                     .C;
                   }
                 });
  for (std::size_t c = 0; c < partial.size(); ++c) AddInto(grads, partial[c]);
  return std::accumulate(costs.begin(), costs.end(), 0.0);
}

TrainResult Train(const NetworkSpec& spec, NetworkParams initial,
                  const EncodedDataset& train, const EncodedDataset& test,
                  const TrainConfig& config, const EpochCallback& on_epoch,
                  const StopPredicate& stop) {
  Require(train.size() > 0, "training set is empty");
  config.Validate(spec.model.v_threshold);
  TrainResult result;
  result.params = std::move(initial);
  AdamState adam = AdamState::For(result.params, config.eta);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 shuffle_rng(config.seed);
  GradientSet grads = ZerosLike(spec);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.shuffle) std::shuffle(order.begin(), order.end(), shuffle_rng);
    const std::uint64_t augment_seed =
        SampleSeed(config.seed, static_cast<std::size_t>(epoch));
    double cost_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size();
         begin += config.batch_size) {
      const std::size_t end =
          std::min(order.size(), begin + config.batch_size);
      for (auto& layer : grads.layers) std::fill(layer.begin(), layer.end(), 0.0);
      cost_sum += BatchGradient(
          spec, result.params, train,
          std::span<const std::size_t>(order.data() + begin, end - begin),
          config.cost, augment_seed, config.workers, &grads);
      const double inv = 1.0 / static_cast<double>(end - begin);
      for (auto& layer : grads.layers) {
        for (double& g : layer) g *= inv;
      }
      AdamStep(&adam, &result.params, grads);
    }
    const EvalResult eval =
        Evaluate(spec, result.params, test, config.cost.t_ref, config.workers);
    MetricsRow row;
    row.epoch = epoch;
    row.train_cost = cost_sum / static_cast<double>(order.size());
    row.test_accuracy = eval.accuracy;
    row.layer_sparsity = eval.hidden_sparsity;
    row.mean_sparsity = eval.mean_hidden_sparsity;
    result.metrics.push_back(row);
    if (on_epoch) on_epoch(row);
    if (stop && stop(row)) break;
  }
  return result;
}

}  // namespace ttfs
