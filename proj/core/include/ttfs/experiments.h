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

#ifndef TTFS_EXPERIMENTS_H_
#define TTFS_EXPERIMENTS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ttfs/config.h"
#include "ttfs/data.h"
#include "ttfs/network.h"
#include "ttfs/objectives.h"
#include "ttfs/training.h"

namespace ttfs {

struct DataSplits {
  RawDataset train;
  RawDataset test;
};

// Loads cfg.dataset from cfg.DataRoot(), keeping the first cfg.subset
// training items and the first cfg.test_subset test items (cfg.subset when
// test_subset is 0). Iris has no split; both sides are the full table.
DataSplits LoadSplits(const RunConfig& cfg);

// Comma-separated output with LF line endings; the run configuration is
// echoed first as "# key = value" lines.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path,
            const std::vector<std::pair<std::string, std::string>>& echo,
            const std::vector<std::string>& header);
  void Row(const std::vector<std::string>& fields);

 private:
  std::ofstream out_;
  std::size_t columns_;
};

std::vector<std::string> MetricsHeader(std::size_t hidden_layers);
std::vector<std::string> MetricsFields(const MetricsRow& row);

// Gradient of the hidden-layer membrane term alone (gamma2 = 1, no L, T or Q)
// with the form, v_hat, step and xi taken from `cfg`.
GradientSet MembraneGradient(const NetworkSpec& spec,
                             const NetworkParams& params,
                             const ForwardTrace& trace, const CostConfig& cfg);

// Mean over weights of |g_integral - g_limit| / |g_integral|. Weights with
// |g_integral| < 1e-300 are skipped and counted in `excluded`. Returns
// nullopt when every weight was skipped.
std::optional<double> RelativeGradientError(std::span<const double> integral,
                                            std::span<const double> limit,
                                            std::size_t* excluded);

struct GradientErrorRow {
  double v_hat = 0.0;
  std::uint64_t n_steps = 0;
  std::size_t layer = 0;  // hidden spiking layer ordinal, from 1
  double error = 0.0;     // per-sample errors averaged over samples
  std::size_t samples = 0;
  std::size_t excluded = 0;
};

// Integral-vs-limit gradient comparison over the first `samples` items of
// `data` (all when 0). The integral step is t_ref / n_steps and the
// suppression window is t_ref.
std::vector<GradientErrorRow> GradientError(
    const NetworkSpec& spec, const NetworkParams& params,
    const EncodedDataset& data, std::size_t samples, double t_ref,
    std::span<const double> v_hats, std::span<const std::uint64_t> n_steps,
    int workers = 1);

struct SweepRow {
  double value = 0.0;
  std::uint64_t seed = 0;
  std::string layer;  // hidden layer ordinal or "mean"
  double sparsity = 0.0;
  double accuracy = 0.0;
};

// Trains one network per (value, seed) of cfg.sweep and reports the final
// epoch's hidden sparsities and test accuracy. Jobs run up to
// cfg.train.workers at a time, each single-threaded. When `job_dir` is set
// every job writes its own metrics CSV there. Rows are ordered by value,
// then seed, then layer.
std::vector<SweepRow> RunSweep(const RunConfig& cfg,
                               const EncodedDataset& train,
                               const EncodedDataset& test,
                               const std::optional<std::filesystem::path>&
                                   job_dir = std::nullopt);

// Sets the swept quantity ("gamma2", "gamma3" or "xi") on `cost`.
void ApplySweepValue(const std::string& parameter, double value,
                     CostConfig* cost);

struct RasterRow {
  std::size_t sample = 0;
  int label = 0;
  std::size_t layer = 0;  // 0 is the input, l + 1 is spec.layers[l]
  std::string kind;       // input, dense, conv or pool
  std::size_t neuron = 0;
  double time = 0.0;
};

// One row per fired neuron per sample, over the first `samples` items.
std::vector<RasterRow> Raster(const NetworkSpec& spec,
                              const NetworkParams& params,
                              const EncodedDataset& data, std::size_t samples);

}  // namespace ttfs

#endif  // TTFS_EXPERIMENTS_H_
