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

#ifndef TTFS_TOOLS_CLI_H_
#define TTFS_TOOLS_CLI_H_

#include <iosfwd>

namespace ttfs::cli {

// Process exit statuses.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kBadConfig = 3,
  kBadCheckpoint = 4,
  kBadData = 5,
};

// Parses argv, runs one subcommand (train, sweep, gradcheck, raster, eval)
// and returns an ExitCode. Progress goes to `out`, diagnostics to `err`.
int RunCommand(int argc, const char* const* argv, std::ostream& out,
               std::ostream& err);

}  // namespace ttfs::cli

#endif  // TTFS_TOOLS_CLI_H_
