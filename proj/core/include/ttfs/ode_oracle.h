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

#ifndef TTFS_ODE_ORACLE_H_
#define TTFS_ODE_ORACLE_H_

#include <optional>
#include <span>
#include <vector>

#include "ttfs/neuron.h"
#include "ttfs/spikes.h"

namespace ttfs {

// Uniformly sampled membrane potential; values[0] is t = 0.
struct MembraneTrace {
  std::vector<double> sample_times;
  std::vector<double> values;
  double dt = 0.0;
};

struct OdeResult {
  MembraneTrace trace;                 // empty unless recording was requested
  std::optional<double> crossing_time; // first upward threshold crossing
};

// Forward-Euler integration of
//   dv/dt = -v / tau_v + I,   dI/dt = -I / tau_I + sum_j w_j delta(t - t_j)
// with each delta realized as a jump of I by w_j at the first grid point at or
// after t_j. The crossing time is linearly interpolated between grid points.
// Verification only: the closed-form solver is what training uses.
OdeResult SimulateOde(const NeuronModelConfig& model,
                      std::span<const double> weights,
                      const SpikeVector& inputs, double dt, double horizon,
                      bool record_trace = true);

}  // namespace ttfs

#endif  // TTFS_ODE_ORACLE_H_
