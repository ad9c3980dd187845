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

#ifndef TTFS_SRC_IRIS_TABLE_H_
#define TTFS_SRC_IRIS_TABLE_H_

namespace ttfs::internal {

struct IrisRow {
  double features[4];
  int label;
};

extern const IrisRow kIrisRows[150];

}  // namespace ttfs::internal

#endif  // TTFS_SRC_IRIS_TABLE_H_
