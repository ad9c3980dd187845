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

#include "cli.h"

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ttfs/checkpoint.h"
#include "ttfs/config.h"
#include "ttfs/data.h"
#include "ttfs/error.h"
#include "ttfs/experiments.h"
#include "ttfs/format.h"
#include "ttfs/network.h"
#include "ttfs/training.h"

namespace ttfs::cli {
namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::size_t> subset;
  std::string checkpoint;
  std::vector<std::string> overrides;
};

RunConfig ResolveConfig(const Flags& f) {
  RunConfig cfg;
  if (!f.config.empty()) cfg = LoadRunConfig(f.config);
  for (const std::string& kv : f.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--set expects section.key=value, got '" + kv + "'");
    }
    cfg.Set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!f.out.empty()) cfg.out_dir = f.out;
  if (f.seed) cfg.train.seed = *f.seed;
  if (f.workers) cfg.train.workers = *f.workers;
  if (f.subset) cfg.subset = *f.subset;
  if (!f.checkpoint.empty()) cfg.checkpoint = f.checkpoint;
  cfg.Finalize();
  std::filesystem::create_directories(cfg.out_dir);
  return cfg;
}

NetworkParams ParamsFor(const RunConfig& cfg, const NetworkSpec& spec,
                        bool required) {
  if (!cfg.checkpoint.empty()) return LoadCheckpointFor(cfg.checkpoint, spec);
  if (required) {
    throw ConfigError("a checkpoint is required (--checkpoint or "
                      "output.checkpoint)");
  }
  return InitializeParams(spec, cfg.train.cost.t_ref, cfg.train.seed);
}

int Train(const RunConfig& cfg, std::ostream& out) {
  const NetworkSpec spec = cfg.BuildSpec();
  const DataSplits data = LoadSplits(cfg);
  const EncodedDataset train(&data.train, cfg.Encode());
  EncodeOptions test_opts = cfg.Encode();
  test_opts.augment = false;
  const EncodedDataset test(&data.test, test_opts);
  const std::size_t hidden = spec.SpikingLayers().size() - 1;
  CsvWriter csv(cfg.out_dir / "metrics.csv", cfg.Echo(), MetricsHeader(hidden));
  const TrainResult result = ttfs::Train(
      spec, InitializeParams(spec, cfg.train.cost.t_ref, cfg.train.seed),
      train, test, cfg.train, [&](const MetricsRow& row) {
        csv.Row(MetricsFields(row));
        out << "epoch " << row.epoch << " cost " << FormatDouble(row.train_cost)
            << " accuracy " << FormatDouble(row.test_accuracy)
            << " sparsity " << FormatDouble(row.mean_sparsity) << std::endl;
      });
  const auto path = cfg.checkpoint.empty() ? cfg.out_dir / "model.ttfs"
                                           : cfg.checkpoint;
  SaveCheckpoint(path, spec, result.params);
  out << "checkpoint " << path.string() << '\n';
  return kOk;
}

int Sweep(const RunConfig& cfg, std::ostream& out) {
  if (cfg.sweep.values.empty()) throw ConfigError("sweep.values is empty");
  const DataSplits data = LoadSplits(cfg);
  const EncodedDataset train(&data.train, cfg.Encode());
  EncodeOptions test_opts = cfg.Encode();
  test_opts.augment = false;
  const EncodedDataset test(&data.test, test_opts);
  const auto jobs = cfg.out_dir / "sweep_jobs";
  std::filesystem::create_directories(jobs);
  const std::vector<SweepRow> rows = RunSweep(cfg, train, test, jobs);
  CsvWriter csv(cfg.out_dir / "sweep.csv", cfg.Echo(),
                {"parameter", "value", "seed", "layer", "sparsity", "accuracy"});
  for (const SweepRow& r : rows) {
    csv.Row({cfg.sweep.parameter, FormatDouble(r.value), std::to_string(r.seed),
             r.layer, FormatDouble(r.sparsity), FormatDouble(r.accuracy)});
  }
  out << rows.size() << " rows written to "
      << (cfg.out_dir / "sweep.csv").string() << '\n';
  return kOk;
}

int Gradcheck(const RunConfig& cfg, std::ostream& out) {
  const NetworkSpec spec = cfg.BuildSpec();
  const NetworkParams params = ParamsFor(cfg, spec, false);
  const RawDataset raw = LoadNamed(cfg.dataset, cfg.DataRoot(), Split::kTrain)
                             .Head(cfg.subset);
  EncodeOptions opts = cfg.Encode();
  opts.augment = false;
  const EncodedDataset data(&raw, opts);
  const auto rows = GradientError(spec, params, data, cfg.gradcheck.samples,
                                  cfg.train.cost.t_ref, cfg.gradcheck.v_hats,
                                  cfg.gradcheck.n_steps, cfg.train.workers);
  CsvWriter csv(cfg.out_dir / "gradcheck.csv", cfg.Echo(),
                {"v_hat", "n_steps", "layer", "error", "samples", "excluded"});
  for (const GradientErrorRow& r : rows) {
    csv.Row({FormatDouble(r.v_hat), std::to_string(r.n_steps),
             std::to_string(r.layer), FormatDouble(r.error),
             std::to_string(r.samples), std::to_string(r.excluded)});
    out << "v_hat " << FormatDouble(r.v_hat) << " n_steps " << r.n_steps
        << " layer " << r.layer << " error " << FormatDouble(r.error) << std::endl;
  }
  return kOk;
}

int RasterCmd(const RunConfig& cfg, std::ostream& out) {
  const NetworkSpec spec = cfg.BuildSpec();
  const NetworkParams params = ParamsFor(cfg, spec, false);
  const RawDataset raw =
      LoadNamed(cfg.dataset, cfg.DataRoot(), Split::kTest).Head(cfg.raster_samples);
  EncodeOptions opts = cfg.Encode();
  opts.augment = false;
  const EncodedDataset data(&raw, opts);
  const auto rows = Raster(spec, params, data, cfg.raster_samples);
  CsvWriter csv(cfg.out_dir / "raster.csv", cfg.Echo(),
                {"sample", "label", "layer", "kind", "neuron", "time"});
  for (const RasterRow& r : rows) {
    csv.Row({std::to_string(r.sample), std::to_string(r.label),
             std::to_string(r.layer), r.kind, std::to_string(r.neuron),
             FormatDouble(r.time)});
  }
  out << rows.size() << " spikes written to "
      << (cfg.out_dir / "raster.csv").string() << '\n';
  return kOk;
}

int Eval(const RunConfig& cfg, std::ostream& out) {
  const NetworkSpec spec = cfg.BuildSpec();
  const NetworkParams params = ParamsFor(cfg, spec, true);
  RawDataset raw = LoadNamed(cfg.dataset, cfg.DataRoot(), Split::kTest);
  raw = raw.Head(cfg.test_subset > 0 ? cfg.test_subset : cfg.subset);
  EncodeOptions opts = cfg.Encode();
  opts.augment = false;
  const EncodedDataset data(&raw, opts);
  const EvalResult r =
      Evaluate(spec, params, data, cfg.train.cost.t_ref, cfg.train.workers);
  std::vector<std::string> header{"accuracy"};
  std::vector<std::string> row{FormatDouble(r.accuracy)};
  for (std::size_t k = 0; k < r.hidden_sparsity.size(); ++k) {
    header.push_back("sparsity_l" + std::to_string(k + 1));
    row.push_back(FormatDouble(r.hidden_sparsity[k]));
  }
  header.push_back("sparsity_mean");
  row.push_back(FormatDouble(r.mean_hidden_sparsity));
  CsvWriter csv(cfg.out_dir / "eval.csv", cfg.Echo(), header);
  csv.Row(row);
  out << "accuracy " << FormatDouble(r.accuracy) << " sparsity "
      << FormatDouble(r.mean_hidden_sparsity) << '\n';
  return kOk;
}

}  // namespace

int RunCommand(int argc, const char* const* argv, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"Event-driven training and analysis of TTFS spiking networks",
               "ttfs"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config, "INI run configuration")
      ->check(CLI::ExistingFile);
  app.add_option("--out", f.out, "Output directory");
  app.add_option("--seed", f.seed, "Training and initialization seed");
  app.add_option("--workers", f.workers, "Worker threads")
      ->check(CLI::PositiveNumber);
  app.add_option("--subset", f.subset, "Use the first N items of each split");
  app.add_option("--checkpoint", f.checkpoint, "Checkpoint path");
  app.add_option("--set", f.overrides, "Override a config key: section.key=value");

  int (*action)(const RunConfig&, std::ostream&) = nullptr;
  app.add_subcommand("train", "Train one network; writes metrics.csv and a checkpoint")
      ->callback([&] { action = Train; });
  app.add_subcommand("sweep", "Sparsity-accuracy sweep over gamma2, gamma3 or xi")
      ->callback([&] { action = Sweep; });
  app.add_subcommand("gradcheck", "Integral vs limit membrane gradient error table")
      ->callback([&] { action = Gradcheck; });
  app.add_subcommand("raster", "Per-sample spike times of every layer")
      ->callback([&] { action = RasterCmd; });
  app.add_subcommand("eval", "Accuracy and sparsity of a checkpoint")
      ->callback([&] { action = Eval; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  try {
    const RunConfig cfg = ResolveConfig(f);
    return action(cfg, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kBadConfig;
  } catch (const CheckpointError& e) {
    err << "checkpoint error: " << e.what() << '\n';
    return kBadCheckpoint;
  } catch (const DataFormatError& e) {
    err << "data error: " << e.what() << '\n';
    return kBadData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace ttfs::cli
