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

#include "ttfs/neuron.h"

#include <algorithm>
#include <numeric>

namespace ttfs {

SpikeVector::SpikeVector(std::vector<std::optional<double>> times)
    : times_(std::move(times)) {
  for (const auto& t : times_) {
    Require(!t || (std::isfinite(*t) && *t >= 0.0),
            "spike times must be finite and non-negative");
  }
}

SpikeVector SpikeVector::FromTimes(std::span<const double> times) {
  SpikeVector out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) out.Set(i, times[i]);
  return out;
}

void SpikeVector::Set(std::size_t i, double t) {
  Require(std::isfinite(t) && t >= 0.0,
          "spike times must be finite and non-negative");
  times_[i] = t;
}

std::size_t SpikeVector::CountFired() const {
  return static_cast<std::size_t>(
      std::count_if(times_.begin(), times_.end(),
                    [](const auto& t) { return t.has_value(); }));
}

std::string VariantName(NeuronVariant variant) {
  switch (variant) {
    case NeuronVariant::kNonLeaky:
      return "NonLeaky";
    case NeuronVariant::kCurrentSynapse:
      return "CurrentSynapse";
    case NeuronVariant::kAlphaSynapse:
      return "AlphaSynapse";
  }
  return "?";
}

NeuronVariant ParseVariant(const std::string& name) {
  if (name == "NonLeaky") return NeuronVariant::kNonLeaky;
  if (name == "CurrentSynapse") return NeuronVariant::kCurrentSynapse;
  if (name == "AlphaSynapse") return NeuronVariant::kAlphaSynapse;
  throw ContractViolation("unknown neuron variant '" + name +
                          "' (expected NonLeaky, CurrentSynapse or "
                          "AlphaSynapse)");
}

void NeuronModelConfig::Validate() const {
  Require(std::isfinite(v_threshold) && v_threshold > 0.0,
          "v_threshold must be positive");
  if (leaky()) {
    Require(std::isfinite(tau) && tau > 0.0, "tau must be positive");
  }
}

double MembranePotentialAt(const NeuronModelConfig& model,
                           std::span<const double> weights,
                           const SpikeVector& inputs, double t) {
  Require(weights.size() == inputs.size(),
          "weights and inputs must have equal length");
  Require(std::isfinite(t), "evaluation time must be finite");
  double v = 0.0;
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    if (!inputs.fired(j) || inputs.time(j) > t) continue;
    v += weights[j] * Kernel(model, t - inputs.time(j));
  }
  return v;
}

OrderedInputs OrderedInputs::Build(const NeuronModelConfig& model,
                                   std::span<const std::optional<double>> inputs,
                                   double horizon) {
  OrderedInputs out;
  out.order.reserve(inputs.size());
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    if (inputs[j] && *inputs[j] <= horizon) out.order.push_back(j);
  }
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](std::size_t l, std::size_t r) {
                     return *inputs[l] < *inputs[r];
                   });
  const std::size_t n = out.order.size();
  out.time.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.time[k] = *inputs[out.order[k]];
  if (model.leaky()) {
    out.exp_tau.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      out.exp_tau[k] = std::exp(out.time[k] / model.tau);
    }
  }
  if (model.variant == NeuronVariant::kAlphaSynapse) {
    out.exp_half_tau.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      out.exp_half_tau[k] = std::exp(out.time[k] / (2.0 * model.tau));
    }
  }
  for (std::size_t k = 1; k <= n; ++k) {
    if (k == n || out.time[k] != out.time[k - 1]) out.group_end.push_back(k);
  }
  return out;
}

double SlopeAtFiring(const NeuronModelConfig& model,
                     const FiringSolution& solution) {
  Require(solution.fired(), "slope requested for a neuron that did not fire");
  const double t = *solution.time;
  switch (model.variant) {
    case NeuronVariant::kNonLeaky:
      return solution.sum_w;
    case NeuronVariant::kCurrentSynapse:
      return solution.a * std::exp(-t / model.tau);
    case NeuronVariant::kAlphaSynapse: {
      const double disc = solution.b * solution.b -
                          2.0 * solution.a * model.v_threshold / model.tau;
      return std::exp(-t / (2.0 * model.tau)) * std::sqrt(disc);
    }
  }
  return 0.0;
}

FiringSolution SolveFiringTime(const NeuronModelConfig& model,
                               std::span<const double> weights,
                               const SpikeVector& inputs, double horizon) {
  model.Validate();
  Require(weights.size() == inputs.size(),
          "weights and inputs must have equal length");
  Require(horizon > 0.0, "horizon must be positive");
  for (double w : weights) Require(std::isfinite(w), "non-finite weight");
  const OrderedInputs ordered =
      OrderedInputs::Build(model, inputs.view(), horizon);
  return SolveOrdered(
      model, ordered, [&](std::size_t j) { return weights[j]; }, horizon);
}

std::vector<std::size_t> CausalSet(const NeuronModelConfig& model,
                                   const FiringSolution& solution,
                                   const SpikeVector& inputs, double horizon) {
  const OrderedInputs ordered =
      OrderedInputs::Build(model, inputs.view(), horizon);
  Require(solution.causal_count <= ordered.size(),
          "solution does not belong to these inputs");
  return {ordered.order.begin(),
          ordered.order.begin() +
              static_cast<std::ptrdiff_t>(solution.causal_count)};
}

}  // namespace ttfs
