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

#ifndef TTFS_ERROR_H_
#define TTFS_ERROR_H_

#include <stdexcept>
#include <string>

namespace ttfs {

// Thrown when a caller breaks a documented precondition (shape mismatch,
// non-finite weight, invalid configuration value).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void Require(bool condition, const std::string& what) {
  if (!condition) throw ContractViolation(what);
}

// Malformed or inconsistent dataset files.
class DataFormatError : public std::runtime_error {
 public:
  enum class Kind {
    kIo,
    kWrongMagic,
    kTruncated,
    kCountMismatch,
    kBadRecordSize,
    kBadLabel,
    kParse,
  };
  DataFormatError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Unknown or invalid keys in a run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Checkpoint files that cannot be read back against the expected network.
class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { kIo, kBadMagic, kBadVersion, kTruncated, kShapeMismatch };
  CheckpointError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace ttfs

#endif  // TTFS_ERROR_H_
