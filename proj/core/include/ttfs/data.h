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

#ifndef TTFS_DATA_H_
#define TTFS_DATA_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ttfs/spikes.h"

namespace ttfs {

enum class Split { kTrain, kTest };

// Either 8-bit images (HWC, row-major) or real-valued feature rows.
struct RawDataset {
  Shape3 shape;
  std::vector<std::uint8_t> images;  // size() * shape.size() bytes, or empty
  std::vector<double> features;      // size() * shape.size() values, or empty
  std::vector<int> labels;
  int num_classes = 0;
  Split split = Split::kTrain;

  std::size_t size() const { return labels.size(); }
  bool is_image() const { return !images.empty(); }
  // First `n` items (all items if n is 0 or exceeds the size).
  RawDataset Head(std::size_t n) const;
  // Throws ContractViolation on length or label inconsistencies.
  void Validate() const;
};

RawDataset LoadIdx(const std::filesystem::path& images,
                   const std::filesystem::path& labels);

// CIFAR-10 binary batches: 3073-byte records (label, 1024 R, 1024 G, 1024 B).
// Output is transposed to HWC.
RawDataset LoadCifar10(const std::vector<std::filesystem::path>& batches);

// Iris as 5-column CSV (4 features + class index or name; an optional header
// line is skipped), min-max normalized per feature over all rows.
RawDataset LoadIris(const std::filesystem::path& csv);
RawDataset EmbeddedIris();

// Looks under `root` for the conventional file names of `dataset`
// ("mnist", "fashion_mnist", "cifar10", "iris").
RawDataset LoadNamed(const std::string& dataset,
                     const std::filesystem::path& root, Split split);

struct EncodeOptions {
  double tau_in = 5.0;
  bool double_channels = false;  // append x' = 1 - x channels
  bool iris_bias = false;        // t = tau_in * x plus a trailing spike at 0
  bool augment = false;          // image train split only
};

struct EncodedSample {
  SpikeVector input;
  int label = 0;
};

// Shape of the network input produced by EncodeSample.
Shape3 EncodedShape(const RawDataset& raw, const EncodeOptions& options);

// Applies augmentation (when enabled and the split is kTrain) with `rng`,
// then the TTFS encoding.
EncodedSample EncodeSample(const RawDataset& raw, std::size_t index,
                           const EncodeOptions& options,
                           std::mt19937_64* rng = nullptr);

// Random horizontal flip (p = 0.5), rotation uniform in +-15 degrees
// (nearest neighbour, zero fill), and a random crop of the original size
// after 4-pixel zero padding.
std::vector<std::uint8_t> Augment(std::span<const std::uint8_t> image,
                                  const Shape3& shape, std::mt19937_64& rng);
std::vector<std::uint8_t> FlipHorizontal(std::span<const std::uint8_t> image,
                                         const Shape3& shape);

// Inverse of the image encoding, t -> 1 - t / tau_in.
inline double DecodeIntensity(double t, double tau_in) {
  return 1.0 - t / tau_in;
}

// Lazily encoded view over a raw dataset.
class EncodedDataset {
 public:
  EncodedDataset(const RawDataset* raw, EncodeOptions options)
      : raw_(raw), options_(options) {}

  std::size_t size() const { return raw_->size(); }
  int num_classes() const { return raw_->num_classes; }
  Shape3 input_shape() const { return EncodedShape(*raw_, options_); }
  EncodedSample Get(std::size_t index, std::mt19937_64* rng = nullptr) const {
    return EncodeSample(*raw_, index, options_, rng);
  }
  const RawDataset& raw() const { return *raw_; }
  const EncodeOptions& options() const { return options_; }

 private:
  const RawDataset* raw_;
  EncodeOptions options_;
};

}  // namespace ttfs

#endif  // TTFS_DATA_H_
