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

#ifndef TTFS_CONFIG_H_
#define TTFS_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ttfs/data.h"
#include "ttfs/network.h"
#include "ttfs/training.h"

namespace ttfs {

struct SweepAxis {
  std::string parameter = "gamma2";  // gamma2, gamma3 or xi
  std::vector<double> values;
  std::vector<std::uint64_t> seeds{0};
};

struct GradcheckConfig {
  std::vector<double> v_hats{0.5, 0.9, 0.99, 0.999, 0.9999};
  std::vector<std::uint64_t> n_steps{1000000};
  std::size_t samples = 0;  // 0 means the whole dataset
};

// Everything a run needs. Loaded from an INI file whose sections and keys
// are listed by RunConfig::Keys(); unknown keys throw ConfigError.
struct RunConfig {
  std::string dataset = "mnist";
  std::filesystem::path data_dir;  // empty: TTFS_DATA_DIR
  std::size_t subset = 0;          // first n training items, 0 = all
  std::size_t test_subset = 0;     // first n test items, 0 = all
  double tau_in = 5.0;
  std::optional<bool> double_channels;  // default: dataset == cifar10
  std::optional<bool> iris_bias;        // default: dataset == iris
  std::optional<bool> augment;          // default: dataset == cifar10

  std::string architecture = "784-400-10";
  int padding = 0;
  NeuronModelConfig model;
  double horizon = 0.0;  // 0: 2 * t_ref

  TrainConfig train;
  double window_T = 0.0;                // 0: t_ref
  std::uint64_t integral_steps = 1000;  // dt_integral = t_ref / steps

  std::filesystem::path out_dir = "runs";
  SweepAxis sweep;
  GradcheckConfig gradcheck;
  std::filesystem::path checkpoint;
  std::size_t raster_samples = 1;

  struct Key {
    std::string name;  // "section.key"
    std::string (*get)(const RunConfig&);
    void (*set)(RunConfig&, const std::string&);
  };
  static const std::vector<Key>& Keys();

  // Sets one "section.key"; throws ConfigError for unknown keys or values
  // that do not parse.
  void Set(const std::string& key, const std::string& value);
  // Derived quantities (dt_integral, window default) filled in; throws
  // ConfigError on invalid values.
  void Finalize();

  EncodeOptions Encode() const;
  Shape3 InputShape() const;
  NetworkSpec BuildSpec() const;
  std::filesystem::path DataRoot() const;

  // "section.key = value" for every key, in table order.
  std::vector<std::pair<std::string, std::string>> Echo() const;
};

RunConfig ParseRunConfig(std::istream& in);
RunConfig LoadRunConfig(const std::filesystem::path& path);

}  // namespace ttfs

#endif  // TTFS_CONFIG_H_
