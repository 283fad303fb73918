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

#include "pcmf/training.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "pcmf/error.hpp"

namespace pcmf {

namespace {

void same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(Errc::ShapeMismatch, std::string(what) + ": batch shapes differ");
  }
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

}  // namespace

LossResult loss_sem_cons(const Matrix& cie_input, const Matrix& se_pred, const ToyWorld& world) {
  if (cie_input.rows() != se_pred.rows() || cie_input.cols() != world.config().d_emb ||
      se_pred.cols() != world.config().d_z || se_pred.rows() == 0) {
    throw Error(Errc::ShapeMismatch, "loss_sem_cons: batch shapes do not match the world");
  }
  const Matrix rebuilt = world.rebuild(se_pred);
  const auto b = static_cast<double>(se_pred.rows());

  LossResult out;
  Matrix grad_rebuilt(rebuilt.rows(), rebuilt.cols());
  for (Eigen::Index r = 0; r < rebuilt.rows(); ++r) {
    const Eigen::RowVectorXd x = cie_input.row(r);
    const Eigen::RowVectorXd y = rebuilt.row(r);
    const double nx = x.norm();
    const double ny = y.norm();
    if (nx < kZeroNorm) throw Error(Errc::ZeroVector, "loss_sem_cons: zero input embedding");
    const double dot = x.dot(y);
    out.value += 1.0 - dot / (nx * ny);
    // d(1 - cos)/dy = -(x / (|x||y|) - (x.y) y / (|x||y|^3))
    grad_rebuilt.row(r) = -(x / (nx * ny) - (dot / (nx * ny * ny * ny)) * y) / b;
  }
  out.value /= b;
  out.grad = world.rebuild_vjp(se_pred, grad_rebuilt);
  return out;
}

LossResult loss_l1(const Matrix& se_pred, const Matrix& se_true) {
  same_shape(se_pred, se_true, "loss_l1");
  if (se_pred.rows() == 0) throw Error(Errc::ShapeMismatch, "loss_l1: empty batch");
  const auto b = static_cast<double>(se_pred.rows());
  const Matrix diff = se_pred - se_true;
  LossResult out;
  out.value = diff.cwiseAbs().sum() / b;
  out.grad = diff.unaryExpr([b](double v) { return sign(v) / b; });
  return out;
}

LossResult loss_reg(const Matrix& se_pred) {
  if (se_pred.cols() < 2 || se_pred.rows() == 0) {
    throw Error(Errc::ShapeMismatch, "loss_reg: need a non-empty batch of width >= 2");
  }
  const auto b = static_cast<double>(se_pred.rows());
  const auto d = static_cast<double>(se_pred.cols());
  LossResult out;
  out.grad.resize(se_pred.rows(), se_pred.cols());
  for (Eigen::Index r = 0; r < se_pred.rows(); ++r) {
    const Eigen::RowVectorXd s = se_pred.row(r);
    const double mean = s.mean();
    const Eigen::RowVectorXd centered = s.array() - mean;
    const double std = std::sqrt(centered.squaredNorm() / d);
    out.value += std::abs(mean) + std::abs(std - 1.0);
    Eigen::RowVectorXd g = Eigen::RowVectorXd::Constant(s.size(), sign(mean) / d);
    if (std > 0.0) g += (sign(std - 1.0) / (d * std)) * centered;
    out.grad.row(r) = g / b;
  }
  out.value /= b;
  return out;
}

double total_loss(double sem_cons, double l1, double reg, const LossWeights& w) {
  if (!std::isfinite(sem_cons) || !std::isfinite(l1) || !std::isfinite(reg)) {
    throw Error(Errc::NonFinite, "total_loss: non-finite loss component");
  }
  return w.sem_cons * sem_cons + w.l1 * l1 + w.reg * reg;
}

void TrainConfig::validate() const {
  if (iterations < 1) throw Error(Errc::RangeError, "iterations must be >= 1");
  if (batch_size < 2) throw Error(Errc::RangeError, "batch_size must be >= 2 for BatchNorm");
  if (weights.sem_cons < 0.0 || weights.l1 < 0.0 || weights.reg < 0.0) {
    throw Error(Errc::RangeError, "loss weights must be >= 0");
  }
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
    throw Error(Errc::RangeError, "holdout_fraction must be in (0, 1)");
  }
  schedule().validate();
}

nn::Schedule TrainConfig::schedule() const {
  // The last iteration runs at lr_min.
  return nn::Schedule{lr_max, lr_min, std::max<std::uint64_t>(1, iterations - 1)};
}

Split split_holdout(std::size_t n, double fraction, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  SeededRng rng(splitmix64(seed ^ 0x686F6C646F7574ull));
  for (std::size_t i = n; i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.below(i)]);
  }
  const auto n_hold = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * fraction));
  Split s;
  s.holdout.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(std::min(n_hold, n)));
  s.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(std::min(n_hold, n)), perm.end());
  std::sort(s.holdout.begin(), s.holdout.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

namespace {

void check_net_matches(const C2SNetwork& net, const PairDataset& data, const ToyWorld& world) {
  if (net.net.input_width() != world.config().d_emb ||
      net.net.output_width() != world.config().d_z) {
    throw Error(Errc::ShapeMismatch, "network widths do not match the world's d_emb -> d_z");
  }
  if (data.d_emb != world.config().d_emb || data.d_z != world.config().d_z) {
    throw Error(Errc::ShapeMismatch, "dataset dimensions do not match the world");
  }
}

std::vector<std::size_t> draw_batch(const std::vector<std::size_t>& pool, int size,
                                    SeededRng& rng) {
  std::vector<std::size_t> picks;
  picks.reserve(static_cast<std::size_t>(size));
  std::unordered_set<std::size_t> seen;
  while (picks.size() < static_cast<std::size_t>(size)) {
    const std::size_t idx = pool[rng.below(pool.size())];
    if (seen.insert(idx).second) picks.push_back(idx);
  }
  return picks;
}

}  // namespace

TrainResult train(C2SNetwork& net, const PairDataset& data, const ToyWorld& world,
                  const TrainConfig& config) {
  config.validate();
  require_matching_world(data, world);
  check_net_matches(net, data, world);

  TrainResult result;
  result.split = split_holdout(data.size(), config.holdout_fraction, config.data_seed);
  if (result.split.holdout.empty() ||
      result.split.train.size() < static_cast<std::size_t>(config.batch_size)) {
    throw Error(Errc::InsufficientData,
                "dataset of " + std::to_string(data.size()) +
                    " records is too small for the holdout split and batch size");
  }

  result.adam = nn::AdamState::zeros_like(net.net.params());
  const nn::Schedule schedule = config.schedule();
  result.metrics.history.reserve(config.iterations);

  for (std::uint64_t t = 0; t < config.iterations; ++t) {
    SeededRng rng = SeededRng::derive(config.data_seed, t);
    const auto batch = draw_batch(result.split.train, config.batch_size, rng);
    const Matrix cie = gather_rows(data.cie, batch);
    const Matrix se_true = gather_rows(data.se, batch);

    const nn::Activations acts = nn::forward(net.net, cie, nn::Mode::Train, rng);
    const Matrix& se_pred = acts.output();

    const LossResult sem = loss_sem_cons(cie, se_pred, world);
    const LossResult l1 = loss_l1(se_pred, se_true);
    const LossResult reg = loss_reg(se_pred);
    const double total = total_loss(sem.value, l1.value, reg.value, config.weights);

    const Matrix grad = config.weights.sem_cons * sem.grad + config.weights.l1 * l1.grad +
                        config.weights.reg * reg.grad;
    const nn::Gradients grads = nn::backward(net.net, acts, grad);
    const double lr = nn::cosine_lr(std::min(t, schedule.total_steps), schedule);
    nn::adam_step(net.net.params(), grads.params, result.adam, lr);

    result.metrics.history.push_back(HistoryEntry{total, sem.value, l1.value, reg.value, lr});
    if (config.record_batches) result.batches.push_back(batch);
  }
  if (!result.split.holdout.empty()) {
    std::vector<HistoryEntry> history = std::move(result.metrics.history);
    result.metrics = evaluate(net, world, data, result.split.holdout);
    result.metrics.history = std::move(history);
  }
  return result;
}

LatentStats latent_stats(const Matrix& se) {
  LatentStats s;
  if (se.rows() == 0) return s;
  for (Eigen::Index r = 0; r < se.rows(); ++r) {
    const double mean = se.row(r).mean();
    const double std =
        std::sqrt((se.row(r).array() - mean).square().sum() / static_cast<double>(se.cols()));
    s.mean_abs_mean += std::abs(mean);
    s.mean_abs_std_minus_one += std::abs(std - 1.0);
  }
  s.mean_abs_mean /= static_cast<double>(se.rows());
  s.mean_abs_std_minus_one /= static_cast<double>(se.rows());
  return s;
}

Metrics evaluate(const C2SNetwork& net, const ToyWorld& world, const PairDataset& data,
                 std::span<const std::size_t> holdout) {
  if (holdout.empty()) throw Error(Errc::EmptyHoldout, "evaluate: empty holdout");
  require_matching_world(data, world);
  check_net_matches(net, data, world);
  for (std::size_t idx : holdout) {
    if (idx >= data.size()) throw Error(Errc::InvalidArgument, "holdout index out of range");
  }

  const Matrix cie = gather_rows(data.cie, holdout);
  const Matrix se_pred = c2s_forward(net, cie);
  const Matrix rebuilt = world.rebuild(se_pred);

  Metrics m;
  for (Eigen::Index r = 0; r < cie.rows(); ++r) {
    m.mean_cie_cosine_distance += cosine_distance(Vector(cie.row(r).transpose()),
                                                  Vector(rebuilt.row(r).transpose()));
  }
  m.mean_cie_cosine_distance /= static_cast<double>(cie.rows());
  const LatentStats stats = latent_stats(se_pred);
  m.mean_abs_mean_of_se_pred = stats.mean_abs_mean;
  m.mean_abs_std_minus_one = stats.mean_abs_std_minus_one;
  return m;
}

Translation translate(const ToyWorld& world, const PromptPair& prompts, const C2SNetwork& net,
                      const Embedding& cte_input, const ProjectionConfig& config) {
  config.validate();
  const Vector cie_input = finish_projection(
      project_text_to_image_raw(cte_input, prompts, config.alpha_translate), config);
  if (cie_input.size() != net.net.input_width()) {
    throw Error(Errc::ShapeMismatch, "translate: network width differs from embedding width");
  }
  const Vector se = c2s_forward(net, cie_input.transpose()).row(0).transpose();
  const Vector image = world.generate(se);
  Embedding rebuilt = world.encode_image(image);
  const double similarity = cosine_similarity(cie_input, rebuilt.values());
  return Translation{cte_input, cie_input, se, image, std::move(rebuilt), similarity};
}

Translation translate(const ToyWorld& world, const PromptPair& prompts, const C2SNetwork& net,
                      const Vector& attrs, const ProjectionConfig& config) {
  return translate(world, prompts, net, text_prompt_from_attributes(world, attrs), config);
}

}  // namespace pcmf
