/*
 * Copyright 2026 The pcmf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pcmf::cli {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // a library operation raised an error
inline constexpr int kExitUsage = 2;    // bad flags or missing required inputs

/// Runs one subcommand. `args` excludes the program name. A JSON summary (or
/// a JSON error object) is written to `out`; human-readable help goes to `out`
/// as well, and nothing is written anywhere except the declared output paths.
int run_command(const std::vector<std::string>& args, std::ostream& out);

}  // namespace pcmf::cli
