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

#ifndef TTFS_BACKPROP_H_
#define TTFS_BACKPROP_H_

#include <cstddef>
#include <span>
#include <vector>

#include "ttfs/network.h"
#include "ttfs/neuron.h"

namespace ttfs {

// Partial derivatives of one firing time over its causal set; entries are
// aligned with `inputs`. Everything outside the causal set is implicitly 0.
struct TimingPartials {
  std::vector<std::size_t> inputs;
  std::vector<double> d_time_d_weight;
  std::vector<double> d_time_d_input;
};

// Calls fn(k, j, dt_dw, dt_dtj) for each causal entry k (j = ordered.order[k])
// of a fired neuron. Derived from v(t_i) = V_th with the causal set frozen:
//   dt_i/dw_j = -kernel(t_i - t_j) / v'(t_i)
//   dt_i/dt_j =  w_j kernel'(t_i - t_j) / v'(t_i)
template <typename WeightAt, typename Fn>
void ForEachCausalPartial(const NeuronModelConfig& model,
                          const OrderedInputs& ordered,
                          const FiringSolution& solution, WeightAt&& weight_at,
                          Fn&& fn) {
  const double t_i = *solution.time;
  const double inv_slope = 1.0 / SlopeAtFiring(model, solution);
  for (std::size_t k = 0; k < solution.causal_count; ++k) {
    const std::size_t j = ordered.order[k];
    const double s = t_i - ordered.time[k];
    fn(k, j, -Kernel(model, s) * inv_slope,
       weight_at(j) * KernelSlope(model, s) * inv_slope);
  }
}

// Precondition: solution.fired().
TimingPartials FiringTimePartials(const NeuronModelConfig& model,
                                  const FiringSolution& solution,
                                  const SpikeVector& input,
                                  std::span<const double> weights,
                                  double horizon);

// Accumulates upstream_i * dt_i/dw_ij into weight_grad and
// upstream_i * dt_i/dt_j into input_grad over causal pairs only.
void BackwardSpiking(const BlockLayout& layout,
                     std::span<const double> weights,
                     const NeuronModelConfig& model,
                     const SpikingLayerTrace& trace,
                     std::span<const double> upstream,
                     std::span<double> weight_grad,
                     std::span<double> input_grad);

void BackwardDense(const DenseLayer& layer, std::span<const double> weights,
                   const NeuronModelConfig& model,
                   const SpikingLayerTrace& trace,
                   std::span<const double> upstream,
                   std::span<double> weight_grad, std::span<double> input_grad);

// Shared-kernel accumulation over all output positions.
void BackwardConv(const ConvLayer& layer, std::span<const double> kernels,
                  const NeuronModelConfig& model,
                  const SpikingLayerTrace& trace,
                  std::span<const double> upstream,
                  std::span<double> kernel_grad, std::span<double> input_grad);

// Routes each upstream entry to its argmin input.
std::vector<double> BackwardPool(const PoolLayerTrace& trace,
                                 std::span<const double> upstream);

// Full backward sweep. `input_seeds[l]`, when non-empty, is added to the
// gradient with respect to layer l's input times before it is passed down
// (regularizers that depend on presynaptic times use this).
void NetworkBackward(const NetworkSpec& spec, const NetworkParams& params,
                     const ForwardTrace& trace,
                     std::span<const double> output_upstream,
                     const std::vector<std::vector<double>>& input_seeds,
                     GradientSet* grads);

}  // namespace ttfs

#endif  // TTFS_BACKPROP_H_
