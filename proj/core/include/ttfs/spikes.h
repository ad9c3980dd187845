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

#ifndef TTFS_SPIKES_H_
#define TTFS_SPIKES_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace ttfs {

// First-spike times of a population. An absent entry means the neuron never
// fired; there is no numeric stand-in for "never".
class SpikeVector {
 public:
  SpikeVector() = default;
  explicit SpikeVector(std::size_t size) : times_(size) {}
  explicit SpikeVector(std::vector<std::optional<double>> times);

  // Convenience for fully-present inputs.
  static SpikeVector FromTimes(std::span<const double> times);

  std::size_t size() const { return times_.size(); }
  bool fired(std::size_t i) const { return times_[i].has_value(); }
  const std::optional<double>& operator[](std::size_t i) const {
    return times_[i];
  }
  // Precondition: fired(i).
  double time(std::size_t i) const { return *times_[i]; }

  // Requires a finite, non-negative time.
  void Set(std::size_t i, double t);
  void Clear(std::size_t i) { times_[i].reset(); }

  std::size_t CountFired() const;
  std::span<const std::optional<double>> view() const { return times_; }

  friend bool operator==(const SpikeVector&, const SpikeVector&) = default;

 private:
  std::vector<std::optional<double>> times_;
};

// Height x width x channels, stored channel-fastest (HWC).
struct Shape3 {
  int height = 1;
  int width = 1;
  int channels = 1;

  std::size_t size() const {
    return static_cast<std::size_t>(height) * width * channels;
  }
  std::size_t Index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  friend bool operator==(const Shape3&, const Shape3&) = default;
};

}  // namespace ttfs

#endif  // TTFS_SPIKES_H_
