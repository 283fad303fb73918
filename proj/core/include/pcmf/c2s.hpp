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

#include "pcmf/nn.hpp"

namespace pcmf {

struct C2SConfig {
  int d = 512;
  int n_blocks = 5;
  double dropout_rate = 0.1;

  void validate() const;
};

enum class Architecture : std::uint32_t { C2S = 0, PlainMlp = 1 };

/// A projection network from image-embedding space to latent space.
///
/// For Architecture::C2S the graph is head (2 x FC+PReLU), body (n_blocks x
/// [dense block, skip add, dropout]) and tail (FC+PReLU, FC). For
/// Architecture::PlainMlp `depth` FC layers are chained with PReLU between
/// them; `config.n_blocks` is unused and `depth` holds the FC count.
struct C2SNetwork {
  Architecture arch = Architecture::C2S;
  C2SConfig config;
  int depth = 0;
  nn::Network net{1};
};

/// Appends one dense block reading tensor `input` (width d); returns the
/// block's output tensor. Ten FC+BN+PReLU units, four concatenations.
int build_dense_block(nn::Network& net, int input);

C2SNetwork build_c2s(const C2SConfig& config, SeededRng& rng);
C2SNetwork build_plain_mlp(int d, int n_fc, SeededRng& rng);

/// Eval-mode projection of a batch of image embeddings; output is unnormalized.
Matrix c2s_forward(const C2SNetwork& net, const Matrix& cie);

int count_fc_layers(const nn::Network& net);
inline int count_fc_layers(const C2SNetwork& net) { return count_fc_layers(net.net); }

}  // namespace pcmf
