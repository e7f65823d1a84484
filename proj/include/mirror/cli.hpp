// Copyright 2026 The Mirror Authors
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

#include <iosfwd>
#include <string>

#include "mirror/datasource.hpp"

namespace mirror::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitExhausted = 3,
};

// Entry point for the `mirror` tool. Returns the process exit code.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

// Aligned plain-text rendering of a result table: a header row, a dashed
// rule, then one line per row. Numbers are right aligned.
std::string render_table(const datasource::ResultTable& table);

}  // namespace mirror::cli
