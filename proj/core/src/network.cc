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

#include "ttfs/network.h"

#include <algorithm>
#include <cctype>
#include <random>
#include <regex>
#include <sstream>

#include "ttfs/error.h"

namespace ttfs {

ConvLayer ConvLayer::Make(Shape3 input, int kernel, int out_channels,
                          int padding) {
  Require(kernel > 0 && out_channels > 0 && padding >= 0,
          "invalid convolution parameters");
  ConvLayer c;
  c.input = input;
  c.kernel = kernel;
  c.padding = padding;
  c.output = {input.height + 2 * padding - kernel + 1,
              input.width + 2 * padding - kernel + 1, out_channels};
  Require(c.output.height > 0 && c.output.width > 0,
          "convolution kernel larger than its padded input");
  const int patch = c.patch_size();
  c.patch_index.resize(static_cast<std::size_t>(c.positions()) * patch);
  std::size_t k = 0;
  for (int oy = 0; oy < c.output.height; ++oy) {
    for (int ox = 0; ox < c.output.width; ++ox) {
      for (int ci = 0; ci < input.channels; ++ci) {
        for (int ky = 0; ky < kernel; ++ky) {
          for (int kx = 0; kx < kernel; ++kx) {
            const int y = oy + ky - padding;
            const int x = ox + kx - padding;
            const bool inside =
                y >= 0 && y < input.height && x >= 0 && x < input.width;
            c.patch_index[k++] =
                inside ? static_cast<int>(input.Index(y, x, ci)) : -1;
          }
        }
      }
    }
  }
  return c;
}

PoolLayer PoolLayer::Make(Shape3 input) {
  Require(input.height >= 2 && input.width >= 2,
          "pooling needs at least a 2x2 input");
  return {input, {input.height / 2, input.width / 2, input.channels}};
}

bool IsSpiking(const Layer& layer) {
  return !std::holds_alternative<PoolLayer>(layer);
}

std::size_t ParameterCount(const Layer& layer) {
  if (const auto* d = std::get_if<DenseLayer>(&layer)) {
    return static_cast<std::size_t>(d->fan_in) * d->fan_out;
  }
  if (const auto* c = std::get_if<ConvLayer>(&layer)) {
    return static_cast<std::size_t>(c->output.channels) * c->patch_size();
  }
  return 0;
}

std::size_t OutputSize(const Layer& layer) {
  if (const auto* d = std::get_if<DenseLayer>(&layer)) {
    return static_cast<std::size_t>(d->fan_out);
  }
  if (const auto* c = std::get_if<ConvLayer>(&layer)) return c->output.size();
  return std::get<PoolLayer>(layer).output.size();
}

BlockLayout Layout(const Layer& layer) {
  if (const auto* d = std::get_if<DenseLayer>(&layer)) {
    return {1, static_cast<std::size_t>(d->fan_out),
            static_cast<std::size_t>(d->fan_in), nullptr};
  }
  const auto* c = std::get_if<ConvLayer>(&layer);
  Require(c != nullptr, "pooling layers have no block layout");
  return {static_cast<std::size_t>(c->positions()),
          static_cast<std::size_t>(c->output.channels),
          static_cast<std::size_t>(c->patch_size()), c->patch_index.data()};
}

namespace {

std::vector<std::string> SplitArchitecture(const std::string& architecture) {
  std::string compact;
  for (char ch : architecture) {
    if (!std::isspace(static_cast<unsigned char>(ch))) compact += ch;
  }
  std::vector<std::string> tokens;
  std::stringstream stream(compact);
  std::string token;
  while (std::getline(stream, token, '-')) tokens.push_back(token);
  return tokens;
}

}  // namespace

NetworkSpec NetworkSpec::Build(const std::string& architecture, Shape3 input,
                               int padding, const NeuronModelConfig& model,
                               double horizon) {
  model.Validate();
  Require(horizon > 0.0, "horizon must be positive");
  Require(input.size() > 0, "input shape must be non-empty");
  NetworkSpec spec;
  spec.architecture = architecture;
  spec.input_shape = input;
  spec.padding = padding;
  spec.model = model;
  spec.horizon = horizon;

  static const std::regex kConv(R"(Conv\((\d+),(\d+)\))");
  static const std::regex kWidth(R"(\d+)");
  const std::vector<std::string> tokens = SplitArchitecture(architecture);
  Require(!tokens.empty(), "empty architecture string");
  Shape3 current = input;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& token = tokens[i];
    std::smatch match;
    if (std::regex_match(token, match, kConv)) {
      ConvLayer conv = ConvLayer::Make(current, std::stoi(match[1]),
                                       std::stoi(match[2]), padding);
      current = conv.output;
      spec.layers.emplace_back(std::move(conv));
    } else if (token == "Pool") {
      PoolLayer pool = PoolLayer::Make(current);
      current = pool.output;
      spec.layers.emplace_back(pool);
    } else if (std::regex_match(token, kWidth)) {
      const int width = std::stoi(token);
      Require(width > 0, "layer widths must be positive");
      if (i == 0) {
        Require(static_cast<std::size_t>(width) == input.size(),
                "architecture input size " + token +
                    " does not match the data (" +
                    std::to_string(input.size()) + ")");
        continue;
      }
      spec.layers.emplace_back(
          DenseLayer{static_cast<int>(current.size()), width});
      current = {1, 1, width};
    } else {
      throw ContractViolation("bad architecture token '" + token + "' in '" +
                              architecture + "'");
    }
  }
  Require(!spec.layers.empty() &&
              std::holds_alternative<DenseLayer>(spec.layers.back()),
          "the last layer must be dense");
  return spec;
}

std::vector<std::size_t> NetworkSpec::SpikingLayers() const {
  std::vector<std::size_t> out;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (IsSpiking(layers[l])) out.push_back(l);
  }
  return out;
}

std::size_t NetworkSpec::ParameterCount() const {
  std::size_t n = 0;
  for (const Layer& layer : layers) n += ttfs::ParameterCount(layer);
  return n;
}

std::size_t NetworkSpec::OutputSize() const {
  return ttfs::OutputSize(layers.back());
}

std::size_t NetworkParams::size() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.size();
  return n;
}

NetworkParams ZerosLike(const NetworkSpec& spec) {
  NetworkParams params;
  for (const Layer& layer : spec.layers) {
    params.layers.emplace_back(ttfs::ParameterCount(layer), 0.0);
  }
  return params;
}

NetworkParams InitializeParams(const NetworkSpec& spec, double t_ref,
                               std::uint64_t seed) {
  Require(t_ref > 0.0, "t_ref must be positive");
  std::mt19937_64 rng(seed);
  const double tau_eff = spec.model.leaky() ? spec.model.tau : t_ref;
  NetworkParams params = ZerosLike(spec);
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    if (!IsSpiking(spec.layers[l])) continue;
    const double fan_in = static_cast<double>(Layout(spec.layers[l]).row_len);
    std::normal_distribution<double> dist(
        2.0 * spec.model.v_threshold / (tau_eff * fan_in),
        std::sqrt(2.0 / fan_in));
    for (double& w : params.layers[l]) w = dist(rng);
  }
  return params;
}

const SpikeVector& ForwardTrace::output() const {
  if (layers.empty()) return input;
  return std::visit([](const auto& t) -> const SpikeVector& { return t.output; },
                    layers.back());
}

std::vector<std::optional<double>> GatherPatch(const BlockLayout& layout,
                                               std::size_t b,
                                               const SpikeVector& input) {
  std::vector<std::optional<double>> patch(layout.row_len);
  for (std::size_t r = 0; r < layout.row_len; ++r) {
    const long j = layout.InputIndex(b, r);
    if (j >= 0) patch[r] = input[static_cast<std::size_t>(j)];
  }
  return patch;
}

namespace {

SpikingLayerTrace ForwardSpiking(const BlockLayout& layout,
                                 std::span<const double> weights,
                                 const NeuronModelConfig& model,
                                 const SpikeVector& input, double horizon) {
  Require(weights.size() == layout.rows * layout.row_len,
          "weight count does not match the layer shape");
  SpikingLayerTrace trace;
  trace.input = input;
  trace.blocks.reserve(layout.blocks);
  trace.neurons.resize(layout.blocks * layout.rows);
  trace.output = SpikeVector(layout.blocks * layout.rows);
  for (std::size_t b = 0; b < layout.blocks; ++b) {
    if (layout.input_map == nullptr) {
      trace.blocks.push_back(
          OrderedInputs::Build(model, input.view(), horizon));
    } else {
      const auto patch = GatherPatch(layout, b, input);
      trace.blocks.push_back(OrderedInputs::Build(model, patch, horizon));
    }
    const OrderedInputs& ordered = trace.blocks.back();
    for (std::size_t row = 0; row < layout.rows; ++row) {
      const double* w = weights.data() + row * layout.row_len;
      const std::size_t neuron = b * layout.rows + row;
      trace.neurons[neuron] = SolveOrdered(
          model, ordered, [w](std::size_t j) { return w[j]; }, horizon);
      if (trace.neurons[neuron].fired()) {
        trace.output.Set(neuron, *trace.neurons[neuron].time);
      }
    }
  }
  return trace;
}

}  // namespace

SpikingLayerTrace ForwardDense(const DenseLayer& layer,
                               std::span<const double> weights,
                               const NeuronModelConfig& model,
                               const SpikeVector& input, double horizon) {
  Require(input.size() == static_cast<std::size_t>(layer.fan_in),
          "dense input length " + std::to_string(input.size()) +
              " does not match fan_in " + std::to_string(layer.fan_in));
  return ForwardSpiking(Layout(Layer{layer}), weights, model, input, horizon);
}

SpikingLayerTrace ForwardConv(const ConvLayer& layer,
                              std::span<const double> kernels,
                              const NeuronModelConfig& model,
                              const SpikeVector& input, double horizon) {
  Require(input.size() == layer.input.size(),
          "conv input size does not match the layer's input shape");
  const BlockLayout layout{static_cast<std::size_t>(layer.positions()),
                           static_cast<std::size_t>(layer.output.channels),
                           static_cast<std::size_t>(layer.patch_size()),
                           layer.patch_index.data()};
  return ForwardSpiking(layout, kernels, model, input, horizon);
}

PoolLayerTrace ForwardPool(const PoolLayer& layer, const SpikeVector& input) {
  Require(input.size() == layer.input.size(),
          "pool input size does not match the layer's input shape");
  PoolLayerTrace trace;
  trace.input = input;
  trace.routing.resize(layer.output.size());
  trace.output = SpikeVector(layer.output.size());
  for (int oy = 0; oy < layer.output.height; ++oy) {
    for (int ox = 0; ox < layer.output.width; ++ox) {
      for (int c = 0; c < layer.output.channels; ++c) {
        std::optional<std::size_t> best;
        // Window visited in ascending flat index, so ties keep the lowest.
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const std::size_t j = layer.input.Index(2 * oy + dy, 2 * ox + dx, c);
            if (!input.fired(j)) continue;
            if (!best || input.time(j) < input.time(*best)) best = j;
          }
        }
        const std::size_t o = layer.output.Index(oy, ox, c);
        trace.routing[o] = best;
        if (best) trace.output.Set(o, input.time(*best));
      }
    }
  }
  return trace;
}

ForwardTrace NetworkForward(const NetworkSpec& spec,
                            const NetworkParams& params,
                            const SpikeVector& input) {
  Require(input.size() == spec.input_shape.size(),
          "network input does not match the network's input shape");
  Require(params.layers.size() == spec.layers.size(),
          "parameter set does not match the network spec");
  ForwardTrace trace;
  trace.input = input;
  trace.layers.reserve(spec.layers.size());
  const SpikeVector* current = &trace.input;
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const Layer& layer = spec.layers[l];
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      trace.layers.emplace_back(ForwardDense(*d, params.layers[l], spec.model,
                                             *current, spec.horizon));
    } else if (const auto* c = std::get_if<ConvLayer>(&layer)) {
      trace.layers.emplace_back(ForwardConv(*c, params.layers[l], spec.model,
                                            *current, spec.horizon));
    } else {
      trace.layers.emplace_back(
          ForwardPool(std::get<PoolLayer>(layer), *current));
    }
    current = &std::visit(
        [](const auto& t) -> const SpikeVector& { return t.output; },
        trace.layers.back());
  }
  return trace;
}

}  // namespace ttfs
