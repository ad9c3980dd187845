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

#ifndef TTFS_OBJECTIVES_H_
#define TTFS_OBJECTIVES_H_

#include <cstddef>
#include <span>
#include <vector>

#include "ttfs/network.h"
#include "ttfs/neuron.h"

namespace ttfs {

// Which membrane-potential loss feeds the gamma2 term.
enum class MembraneLossForm {
  kLimit,     // M-SSR: closed-form v_hat -> V_th limit
  kIntegral,  // Riemann sum of the supra-v_hat excursion
};

// Which output timing loss feeds L.
enum class TimingLossForm {
  kEarliest,  // -ln softmax(-t / tau_soft)_label: label fires first
  kLiteral,   // ln softmax(t / tau_soft)_label, as SoftmaxCrossEntropy
};

// Weights of the cost C = L + gamma1 T + gamma2 V + gamma3 Q.
struct CostConfig {
  double gamma1 = 1e-4;
  double gamma2 = 0.0;
  double gamma3 = 0.0;
  double xi = 1.0;          // hidden layer k is weighted by xi^k, k = 1, 2, ...
  double tau_soft = 0.9;
  double t_ref = 8.0;
  double window_T = 8.0;    // suppression window [0, T)
  double v_hat = 0.99;      // integral form only
  double dt_integral = 8e-3;
  MembraneLossForm membrane_form = MembraneLossForm::kLimit;
  bool promotion_mode = false;  // Q revives silent neurons (use gamma3 < 0)
  TimingLossForm timing_form = TimingLossForm::kEarliest;

  void Validate(double v_threshold) const;
  // Time assigned to output neurons that never fired.
  double SurrogateTime() const { return 2.0 * t_ref; }
};

struct LossReport {
  double L = 0.0;
  double T_penalty = 0.0;
  double V = 0.0;
  double Q = 0.0;
  double C = 0.0;
  std::vector<double> layer_v;  // unweighted, one per hidden spiking layer
  std::vector<double> layer_q;
};

struct ValueAndGradient {
  double value = 0.0;
  std::vector<double> gradient;
};

// L = ln S_label with S_i = softmax(t / tau_soft); dL/dt_i = (1{i=label} -
// S_i) / tau_soft.
ValueAndGradient SoftmaxCrossEntropy(std::span<const double> times,
                                     std::size_t label, double tau_soft);

// L = -ln P_label with P_i = softmax(-t / tau_soft); dL/dt_i = (1{i=label} -
// P_i) / tau_soft. Minimal when the label neuron fires first.
ValueAndGradient EarliestSpikeCrossEntropy(std::span<const double> times,
                                           std::size_t label, double tau_soft);

// sum_i (t_i - t_ref)^2.
ValueAndGradient TemporalPenalty(std::span<const double> times, double t_ref);

// Gradient destination for one layer's regularizer. Contributions are
// multiplied by `scale` before being added. Either span may be empty.
struct RegularizerSink {
  std::span<double> weight_grad;
  std::span<double> input_grad;
  double scale = 1.0;
};

// M-SSR summed over the layer's neurons that fired before window_T. The
// firing time and the threshold-crossing normalizer are held constant when
// differentiating.
double MembraneSsr(const BlockLayout& layout, std::span<const double> weights,
                   const NeuronModelConfig& model,
                   const SpikingLayerTrace& trace, double window_T,
                   RegularizerSink* sink);

// F-SSR: sum over neurons fired before window_T of their causal weight sum.
// Touches weights only.
double FiringConditionSsr(const BlockLayout& layout,
                          const SpikingLayerTrace& trace, double window_T,
                          RegularizerSink* sink);

// Discretized membrane loss, sampled at k*dt for k*dt <= min(t_i, window_T),
// with sample times and the v > v_hat indicator frozen under
// differentiation. Silent neurons contribute nothing.
double IntegralMembraneLoss(const BlockLayout& layout,
                            std::span<const double> weights,
                            const NeuronModelConfig& model,
                            const SpikingLayerTrace& trace, double window_T,
                            double v_hat, double dt, RegularizerSink* sink);

// Promotion term: full weight-row sum of every neuron that did not fire.
double FiringPromotion(const BlockLayout& layout,
                       std::span<const double> weights,
                       const SpikingLayerTrace& trace, RegularizerSink* sink);

// Hidden-layer V and Q terms of the cost. Adds gamma-and-xi-scaled weight
// gradients to `grads` and presynaptic-time gradients to `input_seeds`
// (indexed by layer) when those are non-null. Fills layer_v, layer_q, V and Q
// of `report`.
void HiddenRegularizers(const NetworkSpec& spec, const NetworkParams& params,
                        const ForwardTrace& trace, const CostConfig& cfg,
                        LossReport* report, GradientSet* grads,
                        std::vector<std::vector<double>>* input_seeds);

// Output times with unfired neurons replaced by cfg.SurrogateTime().
std::vector<double> OutputTimes(const ForwardTrace& trace,
                                const CostConfig& cfg);

// Full cost for one labelled sample. When `grads` is non-null the complete
// gradient (output loss, regularizers, chain through every layer) is added
// into it.
LossReport TotalCost(const NetworkSpec& spec, const NetworkParams& params,
                     const ForwardTrace& trace, std::size_t label,
                     const CostConfig& cfg, GradientSet* grads);

}  // namespace ttfs

#endif  // TTFS_OBJECTIVES_H_
