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

#include <string>
#include <string_view>
#include <vector>

#include "pcmf/c2s.hpp"
#include "pcmf/prompt.hpp"
#include "pcmf/toy_world.hpp"
#include "pcmf/training.hpp"

namespace pcmf {

/// Every tunable of a scripted run as one flat key set.
///
/// Text form is one `key = value` per line; `#` starts a comment. Unknown
/// keys are rejected, missing keys keep the defaults below.
struct RunConfig {
  ToyWorldConfig world;
  C2SConfig c2s{16, 5, 0.1};
  Architecture arch = Architecture::C2S;
  int mlp_layers = 54;
  TrainConfig train;
  ProjectionConfig projection;
  double alpha_manipulate = 0.3;
  std::size_t n_pairs = 20000;
  std::uint64_t pair_seed = 11;
  std::size_t prompt_samples = 10000;

  std::string world_path;
  std::string pairs_path;
  std::string ckpt_path;
  std::string prompts_path;
  std::string out_path;

  /// Cross-field range checks; throws RangeError.
  void validate() const;
};

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);
/// Canonical text form listing every key; parse_config(render_config(c)) == c.
std::string render_config(const RunConfig& config);
std::vector<std::string> config_keys();

}  // namespace pcmf
