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

#include "ttfs/ode_oracle.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ttfs {

OdeResult SimulateOde(const NeuronModelConfig& model,
                      std::span<const double> weights,
                      const SpikeVector& inputs, double dt, double horizon,
                      bool record_trace) {
  model.Validate();
  Require(dt > 0.0 && std::isfinite(dt), "dt must be positive");
  Require(horizon > 0.0, "horizon must be positive");
  Require(weights.size() == inputs.size(),
          "weights and inputs must have equal length");

  // Arrival step of every present spike, ascending.
  std::vector<std::pair<long long, double>> arrivals;
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    if (!inputs.fired(j)) continue;
    arrivals.emplace_back(
        static_cast<long long>(std::ceil(inputs.time(j) / dt - 1e-9)),
        weights[j]);
  }
  std::sort(arrivals.begin(), arrivals.end());

  double inv_tau_v = 0.0;
  double inv_tau_i = 0.0;
  switch (model.variant) {
    case NeuronVariant::kNonLeaky:
      break;
    case NeuronVariant::kCurrentSynapse:
      inv_tau_i = 1.0 / model.tau;
      break;
    case NeuronVariant::kAlphaSynapse:
      inv_tau_v = 1.0 / (2.0 * model.tau);
      inv_tau_i = 1.0 / model.tau;
      break;
  }

  const auto steps = static_cast<long long>(std::floor(horizon / dt));
  OdeResult result;
  result.trace.dt = dt;
  if (record_trace) {
    result.trace.sample_times.reserve(static_cast<std::size_t>(steps) + 1);
    result.trace.values.reserve(static_cast<std::size_t>(steps) + 1);
  }
  double v = 0.0;
  double current = 0.0;
  double previous_v = 0.0;
  std::size_t next = 0;
  for (long long k = 0; k <= steps; ++k) {
    while (next < arrivals.size() && arrivals[next].first <= k) {
      current += arrivals[next].second;
      ++next;
    }
    const double t = static_cast<double>(k) * dt;
    if (record_trace) {
      result.trace.sample_times.push_back(t);
      result.trace.values.push_back(v);
    }
    if (!result.crossing_time && k > 0 && v >= model.v_threshold) {
      const double frac = (model.v_threshold - previous_v) / (v - previous_v);
      result.crossing_time = t - dt + frac * dt;
      if (!record_trace) break;
    }
    previous_v = v;
    const double dv = -v * inv_tau_v + current;
    const double di = -current * inv_tau_i;
    v += dt * dv;
    current += dt * di;
  }
  return result;
}

}  // namespace ttfs
