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

#ifndef TTFS_NEURON_H_
#define TTFS_NEURON_H_

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ttfs/error.h"
#include "ttfs/spikes.h"

namespace ttfs {

// The three (tau_v, tau_I) pairs with closed-form first-spike times:
//   kNonLeaky       (inf, inf)   v = sum w (t - t_j)
//   kCurrentSynapse (inf, tau)   v = tau sum w (1 - exp(-(t - t_j)/tau))
//   kAlphaSynapse   (2tau, tau)  v = 2tau sum w (exp(-(t - t_j)/2tau)
//                                                - exp(-(t - t_j)/tau))
enum class NeuronVariant { kNonLeaky, kCurrentSynapse, kAlphaSynapse };

std::string VariantName(NeuronVariant variant);
NeuronVariant ParseVariant(const std::string& name);

struct NeuronModelConfig {
  NeuronVariant variant = NeuronVariant::kNonLeaky;
  double tau = 1.0;          // unused for kNonLeaky
  double v_threshold = 1.0;

  // Throws ContractViolation unless tau > 0 (leaky variants) and V_th > 0.
  void Validate() const;
  bool leaky() const { return variant != NeuronVariant::kNonLeaky; }
};

// Postsynaptic potential of one unit-weight spike, `s` time units after it
// arrived (s >= 0).
inline double Kernel(const NeuronModelConfig& model, double s) {
  switch (model.variant) {
    case NeuronVariant::kNonLeaky:
      return s;
    case NeuronVariant::kCurrentSynapse:
      return -model.tau * std::expm1(-s / model.tau);
    case NeuronVariant::kAlphaSynapse:
      return 2.0 * model.tau *
             (std::exp(-s / (2.0 * model.tau)) - std::exp(-s / model.tau));
  }
  return 0.0;
}

// d Kernel / ds.
inline double KernelSlope(const NeuronModelConfig& model, double s) {
  switch (model.variant) {
    case NeuronVariant::kNonLeaky:
      return 1.0;
    case NeuronVariant::kCurrentSynapse:
      return std::exp(-s / model.tau);
    case NeuronVariant::kAlphaSynapse:
      return 2.0 * std::exp(-s / model.tau) -
             std::exp(-s / (2.0 * model.tau));
  }
  return 0.0;
}

// Free membrane trajectory (no reset) at time t.
double MembranePotentialAt(const NeuronModelConfig& model,
                           std::span<const double> weights,
                           const SpikeVector& inputs, double t);

// Present inputs that arrive no later than the horizon, sorted by
// (time, index) and split into groups of equal arrival time. exp_tau and
// exp_half_tau cache exp(t/tau) and exp(t/2tau) for the leaky variants.
struct OrderedInputs {
  std::vector<std::size_t> order;
  std::vector<double> time;
  std::vector<double> exp_tau;
  std::vector<double> exp_half_tau;
  std::vector<std::size_t> group_end;  // exclusive end of each time group

  static OrderedInputs Build(const NeuronModelConfig& model,
                             std::span<const std::optional<double>> inputs,
                             double horizon);
  std::size_t size() const { return order.size(); }
};

// Result of the event-driven threshold search for one neuron.
//
// The causal set is the first `causal_count` entries of the OrderedInputs the
// neuron was solved against. Cached sums run over that set only:
//   sum_w = sum w_j, sum_wt = sum w_j t_j,
//   a = sum w_j exp(t_j/tau), b = sum w_j exp(t_j/2tau),
//   alpha = 2a / ((b + sqrt(D)) sqrt(D)),  D = b^2 - 2 a V_th / tau.
struct FiringSolution {
  std::optional<double> time;
  std::size_t causal_count = 0;
  double sum_w = 0.0;
  double sum_wt = 0.0;
  double a = 0.0;
  double b = 0.0;
  double alpha = 0.0;

  bool fired() const { return time.has_value(); }
};

// dv/dt at the firing time, from the cached sums. Precondition: fired.
double SlopeAtFiring(const NeuronModelConfig& model,
                     const FiringSolution& solution);

// Core solver over pre-sorted inputs. `weight_at(j)` returns the weight of
// input index j (an index into the original, unsorted input vector).
template <typename WeightAt>
FiringSolution SolveOrdered(const NeuronModelConfig& model,
                            const OrderedInputs& in, WeightAt&& weight_at,
                            double horizon);

// Sorts the inputs and runs SolveOrdered. Throws ContractViolation on length
// mismatch or a non-finite weight.
FiringSolution SolveFiringTime(const NeuronModelConfig& model,
                               std::span<const double> weights,
                               const SpikeVector& inputs, double horizon);

// Input indices in the causal set of `solution`, ascending by arrival.
std::vector<std::size_t> CausalSet(const NeuronModelConfig& model,
                                   const FiringSolution& solution,
                                   const SpikeVector& inputs, double horizon);

// --- implementation ---------------------------------------------------------

namespace internal {
// Candidates may undershoot the group arrival time by rounding; such
// candidates are clamped to the arrival time.
inline bool WithinArrival(double candidate, double arrival) {
  return candidate >= arrival - 1e-12 * (1.0 + std::abs(arrival));
}
}  // namespace internal

template <typename WeightAt>
FiringSolution SolveOrdered(const NeuronModelConfig& model,
                            const OrderedInputs& in, WeightAt&& weight_at,
                            double horizon) {
  FiringSolution s;
  const double vth = model.v_threshold;
  const double tau = model.tau;
  const std::size_t groups = in.group_end.size();
  std::size_t k = 0;
  for (std::size_t g = 0; g < groups; ++g) {
    const double arrival = in.time[k];
    const std::size_t end = in.group_end[g];
    for (; k < end; ++k) {
      const double w = weight_at(in.order[k]);
      s.sum_w += w;
      switch (model.variant) {
        case NeuronVariant::kNonLeaky:
          s.sum_wt += w * in.time[k];
          break;
        case NeuronVariant::kCurrentSynapse:
          s.a += w * in.exp_tau[k];
          break;
        case NeuronVariant::kAlphaSynapse:
          s.a += w * in.exp_tau[k];
          s.b += w * in.exp_half_tau[k];
          break;
      }
    }
    const double limit = g + 1 < groups ? in.time[end] : horizon;
    double candidate = std::numeric_limits<double>::infinity();
    switch (model.variant) {
      case NeuronVariant::kNonLeaky:
        if (s.sum_w > 0.0) candidate = (vth + s.sum_wt) / s.sum_w;
        break;
      case NeuronVariant::kCurrentSynapse:
        if (s.sum_w > vth / tau && s.a > 0.0) {
          candidate = tau * std::log(s.a / (s.sum_w - vth / tau));
        }
        break;
      case NeuronVariant::kAlphaSynapse: {
        const double disc = s.b * s.b - 2.0 * s.a * vth / tau;
        if (s.a > 0.0 && s.b > 0.0 && disc >= 0.0) {
          const double root = std::sqrt(disc);
          candidate = -2.0 * tau * std::log((s.b + root) / (2.0 * s.a));
          s.alpha = 2.0 * s.a / ((s.b + root) * root);
        }
        break;
      }
    }
    if (candidate <= limit && internal::WithinArrival(candidate, arrival)) {
      s.time = std::max(candidate, arrival);
      s.causal_count = end;
      return s;
    }
    s.alpha = 0.0;
  }
  s.causal_count = k;
  return s;
}

}  // namespace ttfs

#endif  // TTFS_NEURON_H_
