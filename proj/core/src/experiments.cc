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

#include "ttfs/experiments.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <cmath>
#include <mutex>
#include <thread>
#include <variant>

#include "ttfs/backprop.h"
#include "ttfs/error.h"
#include "ttfs/format.h"

namespace ttfs {
namespace {

const char* KindName(const Layer& layer) {
  if (std::holds_alternative<DenseLayer>(layer)) return "dense";
  if (std::holds_alternative<ConvLayer>(layer)) return "conv";
  return "pool";
}

}  // namespace

DataSplits LoadSplits(const RunConfig& cfg) {
  DataSplits d;
  const std::filesystem::path root = cfg.DataRoot();
  d.train = LoadNamed(cfg.dataset, root, Split::kTrain);
  d.test = LoadNamed(cfg.dataset, root, Split::kTest);
  d.train = d.train.Head(cfg.subset);
  d.test = d.test.Head(cfg.test_subset > 0 ? cfg.test_subset : cfg.subset);
  return d;
}

CsvWriter::CsvWriter(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, std::string>>& echo,
    const std::vector<std::string>& header)
    : out_(path, std::ios::binary | std::ios::trunc), columns_(header.size()) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  for (const auto& [key, value] : echo) {
    out_ << "# " << key << " = " << value << '\n';
  }
  Row(header);
}

void CsvWriter::Row(const std::vector<std::string>& fields) {
  Require(fields.size() == columns_, "CSV row width differs from the header");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out_ << ',';
    out_ << fields[i];
  }
  out_ << '\n';
  out_.flush();
}

std::vector<std::string> MetricsHeader(std::size_t hidden_layers) {
  std::vector<std::string> h{"epoch", "cost", "accuracy"};
  for (std::size_t k = 1; k <= hidden_layers; ++k) {
    h.push_back("sparsity_l" + std::to_string(k));
  }
  h.push_back("sparsity_mean");
  return h;
}

std::vector<std::string> MetricsFields(const MetricsRow& row) {
  std::vector<std::string> f{std::to_string(row.epoch),
                             FormatDouble(row.train_cost),
                             FormatDouble(row.test_accuracy)};
  for (double s : row.layer_sparsity) f.push_back(FormatDouble(s));
  f.push_back(FormatDouble(row.mean_sparsity));
  return f;
}

GradientSet MembraneGradient(const NetworkSpec& spec,
                             const NetworkParams& params,
                             const ForwardTrace& trace, const CostConfig& cfg) {
  CostConfig v_only = cfg;
  v_only.gamma1 = 0.0;
  v_only.gamma2 = 1.0;
  v_only.gamma3 = 0.0;
  GradientSet grads = ZerosLike(spec);
  LossReport report;
  std::vector<std::vector<double>> seeds;
  HiddenRegularizers(spec, params, trace, v_only, &report, &grads, &seeds);
  const std::vector<double> zero(trace.output().size(), 0.0);
  NetworkBackward(spec, params, trace, zero, seeds, &grads);
  return grads;
}

std::optional<double> RelativeGradientError(std::span<const double> integral,
                                            std::span<const double> limit,
                                            std::size_t* excluded) {
  Require(integral.size() == limit.size(),
          "gradient vectors differ in length");
  double sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < integral.size(); ++i) {
    if (std::abs(integral[i]) < 1e-300) {
      if (excluded != nullptr) ++*excluded;
      continue;
    }
    sum += std::abs(integral[i] - limit[i]) / std::abs(integral[i]);
    ++counted;
  }
  if (counted == 0) return std::nullopt;
  return sum / static_cast<double>(counted);
}

std::vector<GradientErrorRow> GradientError(
    const NetworkSpec& spec, const NetworkParams& params,
    const EncodedDataset& data, std::size_t samples, double t_ref,
    std::span<const double> v_hats, std::span<const std::uint64_t> n_steps,
    int workers) {
  const std::size_t count =
      samples == 0 ? data.size() : std::min(samples, data.size());
  Require(count > 0, "gradient study needs at least one sample");
  const std::vector<std::size_t> spiking = spec.SpikingLayers();
  const std::size_t hidden = spiking.size() - 1;
  const std::size_t cells = v_hats.size() * n_steps.size();

  CostConfig base;
  base.t_ref = t_ref;
  base.window_T = t_ref;

  // sums[cell][h], hits[cell][h], excluded[cell][h]
  struct Acc {
    std::vector<double> sum;
    std::vector<std::size_t> hits;
    std::vector<std::size_t> excluded;
  };
  const std::size_t chunks = std::max<std::size_t>(
      1, std::min<std::size_t>(std::max(workers, 1), count));
  std::vector<Acc> acc(chunks);
  for (Acc& a : acc) {
    a.sum.assign(cells * hidden, 0.0);
    a.hits.assign(cells * hidden, 0);
    a.excluded.assign(cells * hidden, 0);
  }
  const auto work = [&](std::size_t c, std::size_t begin, std::size_t end) {
    Acc& a = acc[c];
    for (std::size_t i = begin; i < end; ++i) {
      const EncodedSample s = data.Get(i);
      const ForwardTrace trace = NetworkForward(spec, params, s.input);
      CostConfig limit_cfg = base;
      limit_cfg.membrane_form = MembraneLossForm::kLimit;
      const GradientSet g_lim = MembraneGradient(spec, params, trace, limit_cfg);
      for (std::size_t vi = 0; vi < v_hats.size(); ++vi) {
        for (std::size_t ni = 0; ni < n_steps.size(); ++ni) {
          CostConfig int_cfg = base;
          int_cfg.membrane_form = MembraneLossForm::kIntegral;
          int_cfg.v_hat = v_hats[vi];
          int_cfg.dt_integral = t_ref / static_cast<double>(n_steps[ni]);
          const GradientSet g_int =
              MembraneGradient(spec, params, trace, int_cfg);
          const std::size_t cell = vi * n_steps.size() + ni;
          for (std::size_t h = 0; h < hidden; ++h) {
            const std::size_t l = spiking[h];
            std::size_t skipped = 0;
            const auto e = RelativeGradientError(g_int.layers[l],
                                                 g_lim.layers[l], &skipped);
            a.excluded[cell * hidden + h] += skipped;
            if (e) {
              a.sum[cell * hidden + h] += *e;
              ++a.hits[cell * hidden + h];
            }
          }
        }
      }
    }
  };
  if (chunks == 1) {
    work(0, 0, count);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t c = 0; c < chunks; ++c) {
      threads.emplace_back(work, c, count * c / chunks,
                           count * (c + 1) / chunks);
    }
    for (auto& t : threads) t.join();
  }

  std::vector<GradientErrorRow> rows;
  for (std::size_t vi = 0; vi < v_hats.size(); ++vi) {
    for (std::size_t ni = 0; ni < n_steps.size(); ++ni) {
      const std::size_t cell = vi * n_steps.size() + ni;
      for (std::size_t h = 0; h < hidden; ++h) {
        GradientErrorRow row;
        row.v_hat = v_hats[vi];
        row.n_steps = n_steps[ni];
        row.layer = h + 1;
        double sum = 0.0;
        for (const Acc& a : acc) {
          sum += a.sum[cell * hidden + h];
          row.samples += a.hits[cell * hidden + h];
          row.excluded += a.excluded[cell * hidden + h];
        }
        row.error = row.samples > 0 ? sum / static_cast<double>(row.samples)
                                    : std::nan("");
        rows.push_back(row);
      }
    }
  }
  return rows;
}

void ApplySweepValue(const std::string& parameter, double value,
                     CostConfig* cost) {
  if (parameter == "gamma2") {
    cost->gamma2 = value;
  } else if (parameter == "gamma3") {
    cost->gamma3 = value;
  } else if (parameter == "xi") {
    cost->xi = value;
  } else {
    throw ConfigError("cannot sweep '" + parameter + "'");
  }
}

std::vector<SweepRow> RunSweep(
    const RunConfig& cfg, const EncodedDataset& train,
    const EncodedDataset& test,
    const std::optional<std::filesystem::path>& job_dir) {
  const NetworkSpec spec = cfg.BuildSpec();
  const std::size_t hidden = spec.SpikingLayers().size() - 1;
  struct Job {
    double value;
    std::uint64_t seed;
    MetricsRow final_row;
  };
  std::vector<Job> jobs;
  for (double v : cfg.sweep.values) {
    for (std::uint64_t seed : cfg.sweep.seeds) jobs.push_back({v, seed, {}});
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mu;
  std::exception_ptr error;
  const auto runner = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      try {
        Job& job = jobs[j];
        TrainConfig tc = cfg.train;
        tc.seed = job.seed;
        tc.workers = 1;
        ApplySweepValue(cfg.sweep.parameter, job.value, &tc.cost);
        std::optional<CsvWriter> csv;
        if (job_dir) {
          RunConfig echo_cfg = cfg;
          echo_cfg.train = tc;
          auto echo = echo_cfg.Echo();
          csv.emplace(*job_dir / (cfg.sweep.parameter + "_" +
                                  FormatDouble(job.value) + "_seed" +
                                  std::to_string(job.seed) + ".csv"),
                      echo, MetricsHeader(hidden));
        }
        TrainResult r = Train(
            spec, InitializeParams(spec, tc.cost.t_ref, job.seed), train, test,
            tc, [&](const MetricsRow& row) {
              if (csv) csv->Row(MetricsFields(row));
            });
        job.final_row = r.metrics.back();
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(
      1, std::min<std::size_t>(std::max(cfg.train.workers, 1), jobs.size()));
  if (threads == 1) {
    runner();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(runner);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  std::vector<SweepRow> rows;
  for (const Job& job : jobs) {
    for (std::size_t h = 0; h < job.final_row.layer_sparsity.size(); ++h) {
      rows.push_back({job.value, job.seed, std::to_string(h + 1),
                      job.final_row.layer_sparsity[h],
                      job.final_row.test_accuracy});
    }
    rows.push_back({job.value, job.seed, "mean", job.final_row.mean_sparsity,
                    job.final_row.test_accuracy});
  }
  return rows;
}

std::vector<RasterRow> Raster(const NetworkSpec& spec,
                              const NetworkParams& params,
                              const EncodedDataset& data,
                              std::size_t samples) {
  const std::size_t count = std::min(samples, data.size());
  std::vector<RasterRow> rows;
  for (std::size_t i = 0; i < count; ++i) {
    const EncodedSample s = data.Get(i);
    const ForwardTrace trace = NetworkForward(spec, params, s.input);
    const auto emit = [&](std::size_t layer, const char* kind,
                          const SpikeVector& spikes) {
      for (std::size_t n = 0; n < spikes.size(); ++n) {
        if (spikes.fired(n)) {
          rows.push_back({i, s.label, layer, kind, n, spikes.time(n)});
        }
      }
    };
    emit(0, "input", trace.input);
    for (std::size_t l = 0; l < trace.layers.size(); ++l) {
      const SpikeVector& out = std::visit(
          [](const auto& t) -> const SpikeVector& { return t.output; },
          trace.layers[l]);
      emit(l + 1, KindName(spec.layers[l]), out);
    }
  }
  return rows;
}

}  // namespace ttfs
