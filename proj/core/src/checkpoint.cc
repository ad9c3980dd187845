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

#include "ttfs/checkpoint.h"

#include <bit>
#include <fstream>
#include <iterator>

#include "json.hpp"
#include "ttfs/error.h"

namespace ttfs {
namespace {

using Kind = CheckpointError::Kind;

void PutU32(std::string* out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<char>(v >> (8 * i)));
}

void PutU64(std::string* out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out->push_back(static_cast<char>(v >> (8 * i)));
}

std::uint64_t GetLE(std::string_view bytes, std::size_t offset, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) {
    v |= std::uint64_t{static_cast<unsigned char>(bytes[offset + i])} << (8 * i);
  }
  return v;
}

void NeedBytes(std::string_view bytes, std::size_t needed, const char* what) {
  if (bytes.size() < needed) {
    throw CheckpointError(Kind::kTruncated,
                          std::string("checkpoint truncated in ") + what +
                              ": expected " + std::to_string(needed) +
                              " bytes, got " + std::to_string(bytes.size()));
  }
}

}  // namespace

std::string SerializeSpec(const NetworkSpec& spec) {
  nlohmann::json j;
  j["architecture"] = spec.architecture;
  j["input_shape"] = {spec.input_shape.height, spec.input_shape.width,
                      spec.input_shape.channels};
  j["padding"] = spec.padding;
  j["variant"] = VariantName(spec.model.variant);
  j["tau"] = spec.model.tau;
  j["v_threshold"] = spec.model.v_threshold;
  j["horizon"] = spec.horizon;
  j["parameter_count"] = spec.ParameterCount();
  return j.dump();
}

NetworkSpec DeserializeSpec(const std::string& json) {
  try {
    const nlohmann::json j = nlohmann::json::parse(json);
    NeuronModelConfig model;
    model.variant = ParseVariant(j.at("variant").get<std::string>());
    model.tau = j.at("tau").get<double>();
    model.v_threshold = j.at("v_threshold").get<double>();
    const auto& shape = j.at("input_shape");
    NetworkSpec spec = NetworkSpec::Build(
        j.at("architecture").get<std::string>(),
        Shape3{shape.at(0).get<int>(), shape.at(1).get<int>(),
               shape.at(2).get<int>()},
        j.at("padding").get<int>(), model, j.at("horizon").get<double>());
    if (j.contains("parameter_count") &&
        j["parameter_count"].get<std::size_t>() != spec.ParameterCount()) {
      throw CheckpointError(Kind::kShapeMismatch,
                            "descriptor parameter count disagrees with its "
                            "architecture");
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(Kind::kShapeMismatch,
                          std::string("bad network descriptor: ") + e.what());
  } catch (const ContractViolation& e) {
    throw CheckpointError(Kind::kShapeMismatch,
                          std::string("bad network descriptor: ") + e.what());
  }
}

std::string EncodeCheckpoint(const NetworkSpec& spec,
                             const NetworkParams& params) {
  Require(params.layers.size() == spec.layers.size(),
          "parameters do not match the network spec");
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    Require(params.layers[l].size() == ParameterCount(spec.layers[l]),
            "parameters do not match the network spec");
  }
  const std::string descriptor = SerializeSpec(spec);
  std::string out(kCheckpointMagic);
  PutU32(&out, kCheckpointVersion);
  PutU32(&out, static_cast<std::uint32_t>(descriptor.size()));
  out += descriptor;
  out.reserve(out.size() + 8 * spec.ParameterCount());
  for (const auto& layer : params.layers) {
    for (double w : layer) PutU64(&out, std::bit_cast<std::uint64_t>(w));
  }
  return out;
}

Checkpoint DecodeCheckpoint(std::string_view bytes) {
  NeedBytes(bytes, kCheckpointMagic.size(), "magic");
  if (bytes.substr(0, kCheckpointMagic.size()) != kCheckpointMagic) {
    throw CheckpointError(Kind::kBadMagic, "not a TTFS checkpoint (bad magic)");
  }
  std::size_t pos = kCheckpointMagic.size();
  NeedBytes(bytes, pos + 8, "header");
  const auto version = static_cast<std::uint32_t>(GetLE(bytes, pos, 4));
  if (version != kCheckpointVersion) {
    throw CheckpointError(Kind::kBadVersion,
                          "unsupported checkpoint version " +
                              std::to_string(version));
  }
  const std::size_t length = GetLE(bytes, pos + 4, 4);
  pos += 8;
  NeedBytes(bytes, pos + length, "descriptor");
  Checkpoint ck;
  ck.spec = DeserializeSpec(std::string(bytes.substr(pos, length)));
  pos += length;
  const std::size_t count = ck.spec.ParameterCount();
  NeedBytes(bytes, pos + 8 * count, "weights");
  if (bytes.size() != pos + 8 * count) {
    throw CheckpointError(Kind::kShapeMismatch,
                          "checkpoint payload has " +
                              std::to_string(bytes.size() - pos) +
                              " bytes, descriptor implies " +
                              std::to_string(8 * count));
  }
  ck.params = ZerosLike(ck.spec);
  for (auto& layer : ck.params.layers) {
    for (double& w : layer) {
      w = std::bit_cast<double>(GetLE(bytes, pos, 8));
      pos += 8;
    }
  }
  return ck;
}

void SaveCheckpoint(const std::filesystem::path& path, const NetworkSpec& spec,
                    const NetworkParams& params) {
  const std::string bytes = EncodeCheckpoint(spec, params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(Kind::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError(Kind::kIo, "write failed: " + path.string());
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(Kind::kIo, "cannot open " + path.string());
  const std::string bytes{std::istreambuf_iterator<char>(in),
                          std::istreambuf_iterator<char>()};
  return DecodeCheckpoint(bytes);
}

NetworkParams LoadCheckpointFor(const std::filesystem::path& path,
                                const NetworkSpec& expected) {
  Checkpoint ck = LoadCheckpoint(path);
  if (ck.spec.architecture != expected.architecture ||
      !(ck.spec.input_shape == expected.input_shape) ||
      ck.spec.padding != expected.padding ||
      ck.spec.ParameterCount() != expected.ParameterCount()) {
    throw CheckpointError(Kind::kShapeMismatch,
                          "checkpoint network '" + ck.spec.architecture +
                              "' does not match '" + expected.architecture +
                              "'");
  }
  return std::move(ck.params);
}

}  // namespace ttfs
