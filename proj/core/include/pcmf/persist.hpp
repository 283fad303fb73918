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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "pcmf/c2s.hpp"
#include "pcmf/nn.hpp"
#include "pcmf/prompt.hpp"
#include "pcmf/toy_world.hpp"
#include "pcmf/training.hpp"

namespace pcmf {

// Binary formats are little-endian; reals are stored as f32 and widened to
// f64 on load, so save -> load -> save reproduces the same bytes.
//
// Checkpoint ("PCMF"):
//   magic[4] version:u32
//   config: arch:u32 d:u32 depth:u32 dropout_rate:f64
//   tensor_count:u32
//   per tensor: name_len:u32 name[name_len] rank:u32 dims:u32[rank] data:f32[prod(dims)]
// Tensors appear in parameter-store order, followed by the optional Adam
// state as "adam.t", then "adam.m/<name>" and "adam.v/<name>" per parameter.
//
// Pair dataset ("PCMD"):
//   magic[4] version:u32 d_z:u32 d_emb:u32 n:u64 world_fingerprint:u64 seed:u64
//   n records of d_z + d_emb f32 values (latent first, then image embedding)

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::uint32_t kPairsVersion = 1;

using Bytes = std::vector<std::uint8_t>;

struct LoadedCheckpoint {
  C2SNetwork net;
  std::optional<nn::AdamState> adam;
};

Bytes encode_checkpoint(const C2SNetwork& net, const nn::AdamState* adam = nullptr);
LoadedCheckpoint decode_checkpoint(const Bytes& bytes);
void save_checkpoint(const C2SNetwork& net, const std::string& path,
                     const nn::AdamState* adam = nullptr);
LoadedCheckpoint load_checkpoint(const std::string& path);

Bytes encode_pairs(const PairDataset& data);
PairDataset decode_pairs(const Bytes& bytes);
void save_pairs(const PairDataset& data, const std::string& path);
PairDataset load_pairs(const std::string& path);

// JSON documents. The world file holds only the config and fingerprint; the
// parameters are regenerated from the seed and checked against it.
nlohmann::json world_to_json(const ToyWorld& world);
ToyWorld world_from_json(const nlohmann::json& doc);
void save_world(const ToyWorld& world, const std::string& path);
ToyWorld load_world(const std::string& path);

nlohmann::json prompts_to_json(const PromptPair& prompts, std::uint64_t world_fingerprint);
PromptPair prompts_from_json(const nlohmann::json& doc);
void save_prompts(const PromptPair& prompts, std::uint64_t world_fingerprint,
                  const std::string& path);
PromptPair load_prompts(const std::string& path);

nlohmann::json metrics_to_json(const Metrics& metrics, bool include_history);

Bytes read_file(const std::string& path);
void write_file(const std::string& path, const Bytes& bytes);
std::string hex64(std::uint64_t v);

}  // namespace pcmf
