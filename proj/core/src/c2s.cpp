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

#include "pcmf/c2s.hpp"

#include <algorithm>
#include <string>

#include "pcmf/error.hpp"

namespace pcmf {

void C2SConfig::validate() const {
  if (d < 2) throw Error(Errc::RangeError, "C2S width d must be >= 2");
  if (n_blocks < 1) throw Error(Errc::RangeError, "C2S needs at least one dense block");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw Error(Errc::RangeError, "dropout_rate must be in [0, 1)");
  }
}

namespace {

int fc_bn_prelu(nn::Network& net, int src, int d) {
  return net.prelu(net.batch_norm(net.fully_connected(src, d)));
}

int fc_prelu(nn::Network& net, int src, int d) {
  return net.prelu(net.fully_connected(src, d));
}

}  // namespace

int build_dense_block(nn::Network& net, int input) {
  const int d = net.width(input);
  if (d < 2) throw Error(Errc::RangeError, "dense block width must be >= 2");
  // Row numbers follow the block table: rows 2, 5, 8, 11 concatenate.
  const int r1 = fc_bn_prelu(net, fc_bn_prelu(net, input, d), d);
  const int r2 = net.concat({input, r1});
  const int r4 = fc_bn_prelu(net, fc_bn_prelu(net, r2, d), d);
  const int r5 = net.concat({r2, r4});
  const int r7 = fc_bn_prelu(net, fc_bn_prelu(net, r5, d), d);
  const int r8 = net.concat({r5, r7});
  const int r10 = fc_bn_prelu(net, fc_bn_prelu(net, r8, d), d);
  const int r11 = net.concat({r8, r10});
  return fc_bn_prelu(net, fc_bn_prelu(net, r11, d), d);
}

C2SNetwork build_c2s(const C2SConfig& config, SeededRng& rng) {
  config.validate();
  C2SNetwork out;
  out.arch = Architecture::C2S;
  out.config = config;
  out.depth = 2 + 10 * config.n_blocks + 2;

  nn::Network& net = out.net = nn::Network(config.d);
  const int d = config.d;
  int trunk = fc_prelu(net, fc_prelu(net, net.input(), d), d);
  for (int b = 0; b < config.n_blocks; ++b) {
    const int block = build_dense_block(net, trunk);
    trunk = net.dropout(net.add(trunk, block), config.dropout_rate);
  }
  net.fully_connected(fc_prelu(net, trunk, d), d);
  net.initialize(rng);
  return out;
}

C2SNetwork build_plain_mlp(int d, int n_fc, SeededRng& rng) {
  if (d < 2) throw Error(Errc::RangeError, "MLP width d must be >= 2");
  if (n_fc < 1) throw Error(Errc::RangeError, "MLP needs at least one FC layer");
  C2SNetwork out;
  out.arch = Architecture::PlainMlp;
  out.config = C2SConfig{d, 1, 0.0};
  out.depth = n_fc;

  nn::Network& net = out.net = nn::Network(d);
  int t = net.input();
  for (int i = 0; i < n_fc; ++i) {
    t = net.fully_connected(t, d);
    if (i + 1 < n_fc) t = net.prelu(t);
  }
  net.initialize(rng);
  return out;
}

Matrix c2s_forward(const C2SNetwork& net, const Matrix& cie) {
  return nn::predict(net.net, cie);
}

int count_fc_layers(const nn::Network& net) {
  const auto& layers = net.layers();
  return static_cast<int>(std::count_if(layers.begin(), layers.end(), [](const nn::LayerSpec& l) {
    return l.kind == nn::LayerKind::FullyConnected;
  }));
}

}  // namespace pcmf
