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

#include "ttfs/backprop.h"

#include <variant>

#include "ttfs/error.h"

namespace ttfs {

TimingPartials FiringTimePartials(const NeuronModelConfig& model,
                                  const FiringSolution& solution,
                                  const SpikeVector& input,
                                  std::span<const double> weights,
                                  double horizon) {
  Require(solution.fired(), "partials requested for an unfired neuron");
  Require(weights.size() == input.size(),
          "weights and inputs must have equal length");
  const OrderedInputs ordered =
      OrderedInputs::Build(model, input.view(), horizon);
  Require(solution.causal_count <= ordered.size(),
          "solution does not belong to these inputs");
  TimingPartials out;
  ForEachCausalPartial(
      model, ordered, solution, [&](std::size_t j) { return weights[j]; },
      [&](std::size_t, std::size_t j, double dw, double dt) {
        out.inputs.push_back(j);
        out.d_time_d_weight.push_back(dw);
        out.d_time_d_input.push_back(dt);
      });
  return out;
}

void BackwardSpiking(const BlockLayout& layout,
                     std::span<const double> weights,
                     const NeuronModelConfig& model,
                     const SpikingLayerTrace& trace,
                     std::span<const double> upstream,
                     std::span<double> weight_grad,
                     std::span<double> input_grad) {
  const std::size_t neurons = layout.blocks * layout.rows;
  Require(upstream.size() == neurons && trace.neurons.size() == neurons,
          "upstream gradient does not match the layer's outputs");
  Require(weight_grad.size() == weights.size() &&
              weights.size() == layout.rows * layout.row_len,
          "weight gradient does not match the layer's parameters");
  Require(input_grad.size() == trace.input.size(),
          "input gradient does not match the layer's inputs");
  std::vector<double> patch_grad;
  for (std::size_t b = 0; b < layout.blocks; ++b) {
    const OrderedInputs& ordered = trace.blocks[b];
    std::span<double> local = input_grad;
    if (layout.input_map != nullptr) {
      patch_grad.assign(layout.row_len, 0.0);
      local = patch_grad;
    }
    bool touched = false;
    for (std::size_t row = 0; row < layout.rows; ++row) {
      const std::size_t neuron = b * layout.rows + row;
      const double up = upstream[neuron];
      const FiringSolution& solution = trace.neurons[neuron];
      if (up == 0.0 || !solution.fired()) continue;
      touched = true;
      const double* w = weights.data() + row * layout.row_len;
      double* wg = weight_grad.data() + row * layout.row_len;
      ForEachCausalPartial(
          model, ordered, solution, [w](std::size_t j) { return w[j]; },
          [&](std::size_t, std::size_t j, double dw, double dt) {
            wg[j] += up * dw;
            local[j] += up * dt;
          });
    }
    if (layout.input_map != nullptr && touched) {
      for (std::size_t r = 0; r < layout.row_len; ++r) {
        const long j = layout.InputIndex(b, r);
        if (j >= 0) input_grad[static_cast<std::size_t>(j)] += patch_grad[r];
      }
    }
  }
}

void BackwardDense(const DenseLayer& layer, std::span<const double> weights,
                   const NeuronModelConfig& model,
                   const SpikingLayerTrace& trace,
                   std::span<const double> upstream,
                   std::span<double> weight_grad,
                   std::span<double> input_grad) {
  BackwardSpiking(Layout(Layer{layer}), weights, model, trace, upstream,
                  weight_grad, input_grad);
}

void BackwardConv(const ConvLayer& layer, std::span<const double> kernels,
                  const NeuronModelConfig& model,
                  const SpikingLayerTrace& trace,
                  std::span<const double> upstream,
                  std::span<double> kernel_grad, std::span<double> input_grad) {
  const BlockLayout layout{static_cast<std::size_t>(layer.positions()),
                           static_cast<std::size_t>(layer.output.channels),
                           static_cast<std::size_t>(layer.patch_size()),
                           layer.patch_index.data()};
  BackwardSpiking(layout, kernels, model, trace, upstream, kernel_grad,
                  input_grad);
}

std::vector<double> BackwardPool(const PoolLayerTrace& trace,
                                 std::span<const double> upstream) {
  Require(upstream.size() == trace.routing.size(),
          "upstream gradient does not match the pool output");
  std::vector<double> grad(trace.input.size(), 0.0);
  for (std::size_t o = 0; o < trace.routing.size(); ++o) {
    if (trace.routing[o]) grad[*trace.routing[o]] += upstream[o];
  }
  return grad;
}

void NetworkBackward(const NetworkSpec& spec, const NetworkParams& params,
                     const ForwardTrace& trace,
                     std::span<const double> output_upstream,
                     const std::vector<std::vector<double>>& input_seeds,
                     GradientSet* grads) {
  Require(grads != nullptr && grads->layers.size() == spec.layers.size(),
          "gradient set does not match the network spec");
  Require(trace.layers.size() == spec.layers.size(),
          "trace does not match the network spec");
  std::vector<double> upstream(output_upstream.begin(), output_upstream.end());
  for (std::size_t l = spec.layers.size(); l-- > 0;) {
    const Layer& layer = spec.layers[l];
    std::vector<double> down;
    if (const auto* pool = std::get_if<PoolLayerTrace>(&trace.layers[l])) {
      down = BackwardPool(*pool, upstream);
    } else {
      const auto& st = std::get<SpikingLayerTrace>(trace.layers[l]);
      down.assign(st.input.size(), 0.0);
      BackwardSpiking(Layout(layer), params.layers[l], spec.model, st,
                      upstream, grads->layers[l], down);
    }
    if (l < input_seeds.size() && !input_seeds[l].empty()) {
      Require(input_seeds[l].size() == down.size(),
              "input seed does not match the layer's inputs");
      for (std::size_t j = 0; j < down.size(); ++j) down[j] += input_seeds[l][j];
    }
    upstream = std::move(down);
  }
}

}  // namespace ttfs
