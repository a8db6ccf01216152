// Copyright 2026 The icelayer Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace icelayer::cli {

// Environment overrides use ICELAYER_<KEY> with the key upper-cased, e.g.
// ICELAYER_EPOCHS=50. Precedence: defaults < --config file < environment <
// command-line flags.
inline constexpr const char* kEnvPrefix = "ICELAYER_";

// Runs one command. `args` excludes the program name. Returns the process
// exit code: 0 success, 1 I/O or data error, 2 usage or contract error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace icelayer::cli
