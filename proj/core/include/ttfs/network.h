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

#ifndef TTFS_NETWORK_H_
#define TTFS_NETWORK_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ttfs/neuron.h"
#include "ttfs/spikes.h"

namespace ttfs {

// Fully connected layer; weights are fan_out x fan_in, row-major.
struct DenseLayer {
  int fan_in = 0;
  int fan_out = 0;
};

// Stride-1 convolution over an HWC tensor. Kernels are stored
// out_channel x in_channel x row x column. `patch_index` maps
// (output position, patch entry) to a flat input index, or -1 inside the
// zero padding.
struct ConvLayer {
  Shape3 input;
  Shape3 output;
  int kernel = 0;
  int padding = 0;
  std::vector<int> patch_index;

  int patch_size() const { return input.channels * kernel * kernel; }
  int positions() const { return output.height * output.width; }

  static ConvLayer Make(Shape3 input, int kernel, int out_channels,
                        int padding);
};

// 2x2 / stride 2 earliest-spike pooling. Odd trailing rows and columns are
// dropped.
struct PoolLayer {
  Shape3 input;
  Shape3 output;

  static PoolLayer Make(Shape3 input);
};

using Layer = std::variant<DenseLayer, ConvLayer, PoolLayer>;

bool IsSpiking(const Layer& layer);
std::size_t ParameterCount(const Layer& layer);
std::size_t OutputSize(const Layer& layer);

// A dense or conv layer seen as `blocks` independent groups of `rows` neurons
// that share one input patch of `row_len` entries. Dense layers are a single
// block; conv layers have one block per output position. Neuron index is
// block * rows + row, which matches the HWC output layout.
struct BlockLayout {
  std::size_t blocks = 1;
  std::size_t rows = 0;
  std::size_t row_len = 0;
  const int* input_map = nullptr;  // null means identity

  // Flat input index of patch entry r of block b, or -1 for padding.
  long InputIndex(std::size_t b, std::size_t r) const {
    return input_map ? input_map[b * row_len + r] : static_cast<long>(r);
  }
};

// Precondition: IsSpiking(layer).
BlockLayout Layout(const Layer& layer);

// Ordered layer list plus the neuron model shared by all spiking layers.
struct NetworkSpec {
  std::string architecture;
  Shape3 input_shape;
  int padding = 0;
  NeuronModelConfig model;
  double horizon = 16.0;
  std::vector<Layer> layers;

  // Grammar (tokens joined by '-'): "Conv(k,c)", "Pool", or a positive
  // integer. Integers after the first token are dense layer widths; a leading
  // integer names the flattened input size and must match `input`.
  // Examples: "784-400-10", "Conv(5,6)-Pool-Conv(5,16)-Pool-400-400-10".
  static NetworkSpec Build(const std::string& architecture, Shape3 input,
                           int padding, const NeuronModelConfig& model,
                           double horizon);

  std::vector<std::size_t> SpikingLayers() const;
  std::size_t ParameterCount() const;
  std::size_t OutputSize() const;
};

struct NetworkParams {
  std::vector<std::vector<double>> layers;  // empty for pooling layers

  std::size_t size() const;
};

// Gradients share the parameter layout.
using GradientSet = NetworkParams;

NetworkParams ZerosLike(const NetworkSpec& spec);

// Normal(mu, sqrt(2 / fan_in)) with mu = 2 V_th / (tau_eff * fan_in), where
// tau_eff is tau for leaky variants and t_ref for the non-leaky one.
NetworkParams InitializeParams(const NetworkSpec& spec, double t_ref,
                               std::uint64_t seed);

struct SpikingLayerTrace {
  SpikeVector input;
  std::vector<OrderedInputs> blocks;  // indices are patch entries
  std::vector<FiringSolution> neurons;
  SpikeVector output;
};

struct PoolLayerTrace {
  SpikeVector input;
  std::vector<std::optional<std::size_t>> routing;  // argmin input per output
  SpikeVector output;
};

using LayerTrace = std::variant<SpikingLayerTrace, PoolLayerTrace>;

struct ForwardTrace {
  SpikeVector input;
  std::vector<LayerTrace> layers;

  const SpikeVector& output() const;
};

// Gathers block b's patch from `input` (padding entries absent).
std::vector<std::optional<double>> GatherPatch(const BlockLayout& layout,
                                               std::size_t b,
                                               const SpikeVector& input);

SpikingLayerTrace ForwardDense(const DenseLayer& layer,
                               std::span<const double> weights,
                               const NeuronModelConfig& model,
                               const SpikeVector& input, double horizon);
SpikingLayerTrace ForwardConv(const ConvLayer& layer,
                              std::span<const double> kernels,
                              const NeuronModelConfig& model,
                              const SpikeVector& input, double horizon);
PoolLayerTrace ForwardPool(const PoolLayer& layer, const SpikeVector& input);

ForwardTrace NetworkForward(const NetworkSpec& spec,
                            const NetworkParams& params,
                            const SpikeVector& input);

}  // namespace ttfs

#endif  // TTFS_NETWORK_H_
