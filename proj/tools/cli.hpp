/*
 Copyright 2026 The forge Authors.
 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace forge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;

// Runs one subcommand. args excludes the program name. Reports go to out,
// diagnostics and usage text to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Expands `--config <file>` (any subcommand but build) into the flags it
// names; flags on the command line come after and therefore win.
// Throws forge::Error for an unreadable or malformed file.
std::vector<std::string> expand_config(const std::vector<std::string>& args);

}  // namespace forge::cli
