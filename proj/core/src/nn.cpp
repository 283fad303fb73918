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

#include "pcmf/nn.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pcmf/error.hpp"

namespace pcmf::nn {

std::string_view layer_kind_name(LayerKind kind) noexcept {
  switch (kind) {
    case LayerKind::FullyConnected: return "FC";
    case LayerKind::PReLU: return "PReLU";
    case LayerKind::BatchNorm: return "BN";
    case LayerKind::Dropout: return "Dropout";
    case LayerKind::Concat: return "Concat";
    case LayerKind::Add: return "Add";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// ParamStore

int ParamStore::add(std::string name, Matrix value, int rank, bool trainable) {
  if (index_.count(name) != 0) {
    throw Error(Errc::InvalidArgument, "duplicate parameter name " + name);
  }
  const int id = static_cast<int>(entries_.size());
  index_.emplace(name, id);
  entries_.push_back(Param{std::move(name), std::move(value), rank, trainable});
  return id;
}

const Param* ParamStore::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

Param* ParamStore::find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

std::size_t ParamStore::trainable_scalars() const noexcept {
  std::size_t n = 0;
  for (const auto& p : entries_) {
    if (p.trainable) n += static_cast<std::size_t>(p.value.size());
  }
  return n;
}

// ---------------------------------------------------------------------------
// Network construction

Network::Network(int input_width) {
  if (input_width < 1) {
    throw Error(Errc::InvalidArgument, "network input width must be positive");
  }
  widths_.push_back(input_width);
}

int Network::width(int tensor) const {
  check_source(tensor);
  return widths_[static_cast<std::size_t>(tensor)];
}

void Network::check_source(int tensor) const {
  if (tensor < 0 || tensor >= static_cast<int>(widths_.size())) {
    throw Error(Errc::InvalidArgument,
                "layer source " + std::to_string(tensor) + " does not precede it");
  }
}

int Network::push(LayerSpec spec) {
  for (int src : spec.inputs) check_source(src);
  widths_.push_back(spec.out);
  layers_.push_back(std::move(spec));
  return static_cast<int>(layers_.size());
}

namespace {

std::string layer_prefix(std::size_t index) { return "layer" + std::to_string(index) + "."; }

}  // namespace

int Network::fully_connected(int src, int out) {
  if (out < 1) throw Error(Errc::InvalidArgument, "FC output width must be positive");
  LayerSpec s;
  s.kind = LayerKind::FullyConnected;
  s.inputs = {src};
  s.in = width(src);
  s.out = out;
  const std::string p = layer_prefix(layers_.size());
  s.params = {params_.add(p + "weight", Matrix::Zero(out, s.in), 2, true),
              params_.add(p + "bias", Matrix::Zero(1, out), 1, true)};
  return push(std::move(s));
}

int Network::prelu(int src) {
  LayerSpec s;
  s.kind = LayerKind::PReLU;
  s.inputs = {src};
  s.in = s.out = width(src);
  s.params = {params_.add(layer_prefix(layers_.size()) + "slope",
                          Matrix::Constant(1, 1, kPReLUInitSlope), 1, true)};
  return push(std::move(s));
}

int Network::batch_norm(int src, double momentum, double eps) {
  if (!(momentum > 0.0 && momentum <= 1.0) || !(eps > 0.0)) {
    throw Error(Errc::InvalidArgument, "BatchNorm momentum must be in (0,1], eps > 0");
  }
  LayerSpec s;
  s.kind = LayerKind::BatchNorm;
  s.inputs = {src};
  s.in = s.out = width(src);
  s.momentum = momentum;
  s.eps = eps;
  const std::string p = layer_prefix(layers_.size());
  s.params = {params_.add(p + "gamma", Matrix::Ones(1, s.in), 1, true),
              params_.add(p + "beta", Matrix::Zero(1, s.in), 1, true),
              params_.add(p + "running_mean", Matrix::Zero(1, s.in), 1, false),
              params_.add(p + "running_var", Matrix::Ones(1, s.in), 1, false)};
  return push(std::move(s));
}

int Network::dropout(int src, double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw Error(Errc::InvalidArgument, "dropout rate must be in [0, 1)");
  }
  LayerSpec s;
  s.kind = LayerKind::Dropout;
  s.inputs = {src};
  s.in = s.out = width(src);
  s.rate = rate;
  return push(std::move(s));
}

int Network::concat(std::vector<int> srcs) {
  if (srcs.empty()) throw Error(Errc::InvalidArgument, "concat needs at least one source");
  LayerSpec s;
  s.kind = LayerKind::Concat;
  for (int src : srcs) s.in += width(src);
  s.out = s.in;
  s.inputs = std::move(srcs);
  return push(std::move(s));
}

int Network::add(int a, int b) {
  if (width(a) != width(b)) {
    throw Error(Errc::ShapeMismatch, "add: operand widths differ");
  }
  LayerSpec s;
  s.kind = LayerKind::Add;
  s.inputs = {a, b};
  s.in = s.out = width(a);
  return push(std::move(s));
}

void Network::initialize(SeededRng& rng) {
  for (const auto& layer : layers_) {
    switch (layer.kind) {
      case LayerKind::FullyConnected: {
        Matrix& w = params_[static_cast<std::size_t>(layer.params[0])].value;
        const double stddev = std::sqrt(2.0 / static_cast<double>(layer.in + layer.out));
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
          for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = stddev * rng.normal();
        }
        params_[static_cast<std::size_t>(layer.params[1])].value.setZero();
        break;
      }
      case LayerKind::PReLU:
        params_[static_cast<std::size_t>(layer.params[0])].value.setConstant(kPReLUInitSlope);
        break;
      case LayerKind::BatchNorm:
        params_[static_cast<std::size_t>(layer.params[0])].value.setOnes();
        params_[static_cast<std::size_t>(layer.params[1])].value.setZero();
        params_[static_cast<std::size_t>(layer.params[2])].value.setZero();
        params_[static_cast<std::size_t>(layer.params[3])].value.setOnes();
        break;
      default:
        break;
    }
  }
}

// ---------------------------------------------------------------------------
// Forward

namespace {

const Matrix& param(const ParamStore& store, const LayerSpec& layer, std::size_t slot) {
  return store[static_cast<std::size_t>(layer.params[slot])].value;
}

Activations run_forward(const Network& net, ParamStore* stats, const Matrix& input, Mode mode,
                        SeededRng* rng) {
  if (input.cols() != net.input_width()) {
    throw Error(Errc::ShapeMismatch, "forward: input has " + std::to_string(input.cols()) +
                                         " features, network expects " +
                                         std::to_string(net.input_width()));
  }
  if (input.rows() < 1) throw Error(Errc::ShapeMismatch, "forward: empty batch");
  require_finite(input, "forward input");

  const auto& layers = net.layers();
  const ParamStore& ps = net.params();
  const Eigen::Index n = input.rows();

  Activations acts;
  acts.mode = mode;
  acts.tensors.reserve(layers.size() + 1);
  acts.tensors.push_back(input);
  acts.masks.resize(layers.size());
  acts.normalized.resize(layers.size());
  acts.inv_std.resize(layers.size());

  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& layer = layers[i];
    const Matrix& x = acts.tensors[static_cast<std::size_t>(layer.inputs[0])];
    Matrix y;
    switch (layer.kind) {
      case LayerKind::FullyConnected: {
        y.noalias() = x * param(ps, layer, 0).transpose();
        y.rowwise() += param(ps, layer, 1).row(0);
        break;
      }
      case LayerKind::PReLU: {
        const double a = param(ps, layer, 0)(0, 0);
        y = x.unaryExpr([a](double v) { return v > 0.0 ? v : a * v; });
        break;
      }
      case LayerKind::BatchNorm: {
        const auto gamma = param(ps, layer, 0).row(0).array();
        const auto beta = param(ps, layer, 1).row(0).array();
        Eigen::RowVectorXd mean;
        Eigen::RowVectorXd var;
        if (mode == Mode::Train) {
          if (n < 2) {
            throw Error(Errc::BatchTooSmall, "BatchNorm in train mode needs batch >= 2");
          }
          mean = x.colwise().mean();
          var = (x.rowwise() - mean).array().square().colwise().mean();
          if (stats != nullptr) {
            Matrix& rm = (*stats)[static_cast<std::size_t>(layer.params[2])].value;
            Matrix& rv = (*stats)[static_cast<std::size_t>(layer.params[3])].value;
            const double unbias = static_cast<double>(n) / static_cast<double>(n - 1);
            rm.row(0) = (1.0 - layer.momentum) * rm.row(0) + layer.momentum * mean;
            rv.row(0) = (1.0 - layer.momentum) * rv.row(0) + layer.momentum * unbias * var;
          }
        } else {
          mean = param(ps, layer, 2).row(0);
          var = param(ps, layer, 3).row(0);
        }
        Vector inv = (var.array() + layer.eps).rsqrt().matrix().transpose();
        Matrix xhat = (x.rowwise() - mean).array().rowwise() * inv.transpose().array();
        y = (xhat.array().rowwise() * gamma).rowwise() + beta;
        acts.normalized[i] = std::move(xhat);
        acts.inv_std[i] = std::move(inv);
        break;
      }
      case LayerKind::Dropout: {
        if (mode == Mode::Train && layer.rate > 0.0) {
          const double keep_scale = 1.0 / (1.0 - layer.rate);
          Matrix mask(x.rows(), x.cols());
          for (Eigen::Index r = 0; r < mask.rows(); ++r) {
            for (Eigen::Index c = 0; c < mask.cols(); ++c) {
              mask(r, c) = rng->uniform() >= layer.rate ? keep_scale : 0.0;
            }
          }
          y = x.cwiseProduct(mask);
          acts.masks[i] = std::move(mask);
        } else {
          y = x;
        }
        break;
      }
      case LayerKind::Concat: {
        y.resize(n, layer.out);
        Eigen::Index col = 0;
        for (int src : layer.inputs) {
          const Matrix& part = acts.tensors[static_cast<std::size_t>(src)];
          y.middleCols(col, part.cols()) = part;
          col += part.cols();
        }
        break;
      }
      case LayerKind::Add:
        y = x + acts.tensors[static_cast<std::size_t>(layer.inputs[1])];
        break;
    }
    acts.tensors.push_back(std::move(y));
  }
  return acts;
}

}  // namespace

Activations forward(Network& net, const Matrix& input, Mode mode, SeededRng& rng) {
  return run_forward(net, &net.params(), input, mode, &rng);
}

Activations forward(const Network& net, const Matrix& input) {
  return run_forward(net, nullptr, input, Mode::Eval, nullptr);
}

Matrix predict(const Network& net, const Matrix& input) {
  return forward(net, input).tensors.back();
}

// ---------------------------------------------------------------------------
// Backward

namespace {

void check_fresh(const Network& net, const Activations& acts) {
  const auto& layers = net.layers();
  bool ok = acts.tensors.size() == layers.size() + 1 && acts.masks.size() == layers.size() &&
            acts.normalized.size() == layers.size();
  for (std::size_t t = 0; ok && t < acts.tensors.size(); ++t) {
    ok = acts.tensors[t].cols() == net.width(static_cast<int>(t)) &&
         acts.tensors[t].rows() == acts.tensors[0].rows();
  }
  for (std::size_t i = 0; ok && i < layers.size(); ++i) {
    if (layers[i].kind == LayerKind::BatchNorm) {
      ok = acts.normalized[i].cols() == layers[i].out;
    } else if (layers[i].kind == LayerKind::Dropout && acts.mode == Mode::Train &&
               layers[i].rate > 0.0) {
      ok = acts.masks[i].cols() == layers[i].out;
    }
  }
  if (!ok) {
    throw Error(Errc::StaleActivations, "activations were not produced by this network");
  }
}

void accumulate(Matrix& slot, const Matrix& g) {
  if (slot.size() == 0) {
    slot = g;
  } else {
    slot += g;
  }
}

}  // namespace

Gradients backward(const Network& net, const Activations& acts, const Matrix& output_grad) {
  check_fresh(net, acts);
  const auto& layers = net.layers();
  const ParamStore& ps = net.params();
  if (output_grad.rows() != acts.output().rows() || output_grad.cols() != acts.output().cols()) {
    throw Error(Errc::ShapeMismatch, "backward: output gradient shape differs from output");
  }

  Gradients grads;
  grads.params.reserve(ps.size());
  for (const auto& p : ps) grads.params.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));

  std::vector<Matrix> tgrad(acts.tensors.size());
  tgrad.back() = output_grad;

  for (std::size_t li = layers.size(); li-- > 0;) {
    const LayerSpec& layer = layers[li];
    const Matrix& g = tgrad[li + 1];
    if (g.size() == 0) continue;  // tensor does not reach the output
    const std::size_t src0 = static_cast<std::size_t>(layer.inputs[0]);
    const Matrix& x = acts.tensors[src0];

    switch (layer.kind) {
      case LayerKind::FullyConnected: {
        const Matrix& w = param(ps, layer, 0);
        grads.params[static_cast<std::size_t>(layer.params[0])].noalias() += g.transpose() * x;
        grads.params[static_cast<std::size_t>(layer.params[1])].row(0) += g.colwise().sum();
        accumulate(tgrad[src0], g * w);
        break;
      }
      case LayerKind::PReLU: {
        const double a = param(ps, layer, 0)(0, 0);
        double slope_grad = 0.0;
        Matrix dx(g.rows(), g.cols());
        for (Eigen::Index r = 0; r < g.rows(); ++r) {
          for (Eigen::Index c = 0; c < g.cols(); ++c) {
            const double v = x(r, c);
            if (v > 0.0) {
              dx(r, c) = g(r, c);
            } else {
              dx(r, c) = a * g(r, c);
              slope_grad += g(r, c) * v;
            }
          }
        }
        grads.params[static_cast<std::size_t>(layer.params[0])](0, 0) += slope_grad;
        accumulate(tgrad[src0], dx);
        break;
      }
      case LayerKind::BatchNorm: {
        const Matrix& xhat = acts.normalized[li];
        const auto gamma = param(ps, layer, 0).row(0).array();
        grads.params[static_cast<std::size_t>(layer.params[0])].row(0) +=
            g.cwiseProduct(xhat).colwise().sum();
        grads.params[static_cast<std::size_t>(layer.params[1])].row(0) += g.colwise().sum();
        Matrix dxhat = g.array().rowwise() * gamma;
        const auto inv = acts.inv_std[li].transpose().array();
        Matrix dx;
        if (acts.mode == Mode::Train) {
          const double n = static_cast<double>(g.rows());
          const Eigen::RowVectorXd sum_dxhat = dxhat.colwise().sum();
          const Eigen::RowVectorXd sum_dxhat_xhat = dxhat.cwiseProduct(xhat).colwise().sum();
          Matrix centered = (dxhat * n).rowwise() - sum_dxhat;
          centered -= (xhat.array().rowwise() * sum_dxhat_xhat.array()).matrix();
          dx = (centered.array().rowwise() * (inv / n)).matrix();
        } else {
          dx = (dxhat.array().rowwise() * inv).matrix();
        }
        accumulate(tgrad[src0], dx);
        break;
      }
      case LayerKind::Dropout: {
        if (acts.masks[li].size() != 0) {
          accumulate(tgrad[src0], g.cwiseProduct(acts.masks[li]));
        } else {
          accumulate(tgrad[src0], g);
        }
        break;
      }
      case LayerKind::Concat: {
        Eigen::Index col = 0;
        for (int src : layer.inputs) {
          const Eigen::Index w = acts.tensors[static_cast<std::size_t>(src)].cols();
          accumulate(tgrad[static_cast<std::size_t>(src)], g.middleCols(col, w));
          col += w;
        }
        break;
      }
      case LayerKind::Add:
        accumulate(tgrad[src0], g);
        accumulate(tgrad[static_cast<std::size_t>(layer.inputs[1])], g);
        break;
    }
  }

  grads.input = tgrad.front().size() != 0
                    ? tgrad.front()
                    : Matrix::Zero(acts.tensors.front().rows(), acts.tensors.front().cols());
  return grads;
}

// ---------------------------------------------------------------------------
// Optimizer and schedule

AdamState AdamState::zeros_like(const ParamStore& params, AdamConfig config) {
  AdamState s;
  s.config = config;
  s.m.reserve(params.size());
  s.v.reserve(params.size());
  for (const auto& p : params) {
    s.m.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
    s.v.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
  }
  return s;
}

void adam_step(ParamStore& params, const std::vector<Matrix>& grads, AdamState& state, double lr) {
  if (grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw Error(Errc::ShapeMismatch, "adam_step: gradient/state count differs from parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix& p = params[i].value;
    if (grads[i].rows() != p.rows() || grads[i].cols() != p.cols() ||
        state.m[i].rows() != p.rows() || state.m[i].cols() != p.cols() ||
        state.v[i].rows() != p.rows() || state.v[i].cols() != p.cols()) {
      throw Error(Errc::ShapeMismatch, "adam_step: shape mismatch for " + params[i].name);
    }
  }

  state.t += 1;
  const AdamConfig& c = state.config;
  const double t = static_cast<double>(state.t);
  const double bias1 = 1.0 - std::pow(c.beta1, t);
  const double bias2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].trainable) continue;
    const Matrix& g = grads[i];
    state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * g;
    state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * g.cwiseProduct(g);
    auto m_hat = state.m[i].array() / bias1;
    auto v_hat = state.v[i].array() / bias2;
    params[i].value.array() -= lr * m_hat / (v_hat.sqrt() + c.eps);
  }
}

void Schedule::validate() const {
  if (!(lr_max > lr_min && lr_min > 0.0)) {
    throw Error(Errc::RangeError, "schedule requires lr_max > lr_min > 0");
  }
  if (total_steps < 1) throw Error(Errc::RangeError, "schedule requires total_steps >= 1");
}

double cosine_lr(std::uint64_t t, const Schedule& schedule) {
  schedule.validate();
  if (t > schedule.total_steps) {
    throw Error(Errc::StepOutOfRange, "cosine_lr: step " + std::to_string(t) + " beyond " +
                                          std::to_string(schedule.total_steps));
  }
  if (t == 0) return schedule.lr_max;
  if (t == schedule.total_steps) return schedule.lr_min;
  const double phase = std::numbers::pi * static_cast<double>(t) /
                       static_cast<double>(schedule.total_steps);
  return schedule.lr_min + 0.5 * (schedule.lr_max - schedule.lr_min) * (1.0 + std::cos(phase));
}

Vector finite_diff_grad(const std::function<double(const Vector&)>& f, const Vector& x, double h) {
  if (!(h > 0.0)) throw Error(Errc::InvalidArgument, "finite_diff_grad: h must be positive");
  Vector grad(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double up = f(probe);
    probe[i] = orig - h;
    const double down = f(probe);
    probe[i] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw Error(Errc::NonFinite, "finite_diff_grad: objective is not finite near x");
    }
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace pcmf::nn
