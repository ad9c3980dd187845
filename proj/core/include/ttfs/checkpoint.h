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

#ifndef TTFS_CHECKPOINT_H_
#define TTFS_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "ttfs/network.h"

namespace ttfs {

// Layout: 8-byte magic "TTFSSNN1", uint32 LE version, uint32 LE descriptor
// length, JSON NetworkSpec descriptor, then every weight as an f64 LE in
// layer order (dense rows output-major, conv kernels [out][in][ky][kx]).
inline constexpr std::string_view kCheckpointMagic = "TTFSSNN1";
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  NetworkSpec spec;
  NetworkParams params;
};

std::string SerializeSpec(const NetworkSpec& spec);
NetworkSpec DeserializeSpec(const std::string& json);

std::string EncodeCheckpoint(const NetworkSpec& spec,
                             const NetworkParams& params);
Checkpoint DecodeCheckpoint(std::string_view bytes);

void SaveCheckpoint(const std::filesystem::path& path, const NetworkSpec& spec,
                    const NetworkParams& params);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

// Also throws CheckpointError(kShapeMismatch) if the stored network differs
// from `expected` in architecture or input shape.
NetworkParams LoadCheckpointFor(const std::filesystem::path& path,
                                const NetworkSpec& expected);

}  // namespace ttfs

#endif  // TTFS_CHECKPOINT_H_
