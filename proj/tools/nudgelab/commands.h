// Copyright 2026 The nudgelab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef NUDGELAB_TOOLS_COMMANDS_H_
#define NUDGELAB_TOOLS_COMMANDS_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "config.h"

namespace nudgelab::cli {

// Effective settings after flag and environment overrides.
struct Invocation {
  RunConfig config;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  double alpha = 0.1;
};

// Each command writes its outputs under `inv.out`. Errors are thrown as
// ConfigError / DataError (exit 2) or InfeasibleError (exit 1).
void Simulate(const Invocation& inv);
void Recommend(const Invocation& inv);
void Assign(const Invocation& inv);
void Analyze(const Invocation& inv);
void Report(const Invocation& inv);

// Full command line, argv[0] included. Returns the process exit code and
// prints at most one diagnostic line to `err`.
int Main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int Main(int argc, char** argv);

}  // namespace nudgelab::cli

#endif  // NUDGELAB_TOOLS_COMMANDS_H_
