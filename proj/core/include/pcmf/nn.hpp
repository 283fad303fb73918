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
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pcmf/embedding.hpp"
#include "pcmf/rng.hpp"

namespace pcmf::nn {

// Layer graph
// -----------
// Tensors are numbered: tensor 0 is the network input and layer i writes
// tensor i + 1. Every layer names the tensors it reads, so skip and dense
// connections are plain references to earlier tensor ids. The graph is a DAG
// by construction because a layer may only read tensors that already exist.

enum class LayerKind { FullyConnected, PReLU, BatchNorm, Dropout, Concat, Add };

std::string_view layer_kind_name(LayerKind kind) noexcept;

inline constexpr double kPReLUInitSlope = 0.25;
inline constexpr double kBatchNormMomentum = 0.1;
inline constexpr double kBatchNormEps = 1e-5;

struct LayerSpec {
  LayerKind kind = LayerKind::FullyConnected;
  std::vector<int> inputs;  // tensor ids
  int in = 0;               // input width (Concat: summed width)
  int out = 0;              // output width
  double momentum = kBatchNormMomentum;
  double eps = kBatchNormEps;
  double rate = 0.0;        // dropout
  // Indices into the ParamStore; -1 when unused.
  // FC: {weight, bias}; PReLU: {slope}; BN: {gamma, beta, running_mean, running_var}.
  std::vector<int> params;
};

struct Param {
  std::string name;
  Matrix value;  // rank-1 tensors are stored as a single row
  int rank = 2;
  bool trainable = true;
};

/// Named tensors in insertion order. Order is part of the checkpoint format.
class ParamStore {
 public:
  int add(std::string name, Matrix value, int rank, bool trainable);

  std::size_t size() const noexcept { return entries_.size(); }
  Param& operator[](std::size_t i) { return entries_[i]; }
  const Param& operator[](std::size_t i) const { return entries_[i]; }
  const Param* find(const std::string& name) const;
  Param* find(const std::string& name);

  /// Scalar count over trainable tensors only.
  std::size_t trainable_scalars() const noexcept;

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::vector<Param> entries_;
  std::map<std::string, int> index_;
};

class Network {
 public:
  explicit Network(int input_width);

  int input() const noexcept { return 0; }
  int output() const noexcept { return static_cast<int>(layers_.size()); }
  int width(int tensor) const;
  int input_width() const noexcept { return widths_.front(); }
  int output_width() const noexcept { return widths_.back(); }

  // Builders return the id of the produced tensor.
  int fully_connected(int src, int out);
  int prelu(int src);
  int batch_norm(int src, double momentum = kBatchNormMomentum, double eps = kBatchNormEps);
  int dropout(int src, double rate);
  int concat(std::vector<int> srcs);
  int add(int a, int b);

  /// FC weights ~ N(0, 2/(in+out)), biases 0, PReLU slopes 0.25,
  /// BN gamma 1 / beta 0 / running mean 0 / running var 1.
  void initialize(SeededRng& rng);

  const std::vector<LayerSpec>& layers() const noexcept { return layers_; }
  ParamStore& params() noexcept { return params_; }
  const ParamStore& params() const noexcept { return params_; }

 private:
  int push(LayerSpec spec);
  void check_source(int tensor) const;

  std::vector<LayerSpec> layers_;
  std::vector<int> widths_;
  ParamStore params_;
};

enum class Mode { Train, Eval };

/// Everything backward needs from one forward pass.
struct Activations {
  Mode mode = Mode::Eval;
  std::vector<Matrix> tensors;    // index = tensor id
  std::vector<Matrix> masks;      // dropout masks (already scaled), per layer
  std::vector<Matrix> normalized; // BN x-hat, per layer
  std::vector<Vector> inv_std;    // BN 1/sqrt(var + eps), per layer

  const Matrix& output() const { return tensors.back(); }
};

/// Train mode draws dropout masks from `rng`, uses batch statistics in
/// BatchNorm and updates the running statistics. Eval mode is pure.
Activations forward(Network& net, const Matrix& input, Mode mode, SeededRng& rng);
Activations forward(const Network& net, const Matrix& input);
Matrix predict(const Network& net, const Matrix& input);

struct Gradients {
  std::vector<Matrix> params;  // aligned with ParamStore; zero for buffers
  Matrix input;
};

Gradients backward(const Network& net, const Activations& acts, const Matrix& output_grad);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::uint64_t t = 0;

  static AdamState zeros_like(const ParamStore& params, AdamConfig config = {});
};

/// Bias-corrected Adam update of every trainable tensor; increments t.
void adam_step(ParamStore& params, const std::vector<Matrix>& grads, AdamState& state, double lr);

struct Schedule {
  double lr_max = 1e-4;
  double lr_min = 1e-7;
  std::uint64_t total_steps = 1;

  void validate() const;
};

/// lr_min + (lr_max - lr_min) * (1 + cos(pi t / T)) / 2 for t in [0, T].
double cosine_lr(std::uint64_t t, const Schedule& schedule);

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h.
Vector finite_diff_grad(const std::function<double(const Vector&)>& f, const Vector& x,
                        double h = 1e-5);

}  // namespace pcmf::nn
