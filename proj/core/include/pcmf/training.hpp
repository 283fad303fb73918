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
#include <span>
#include <vector>

#include "pcmf/c2s.hpp"
#include "pcmf/nn.hpp"
#include "pcmf/prompt.hpp"
#include "pcmf/toy_world.hpp"

namespace pcmf {

/// A batch-mean loss value and its gradient w.r.t. the predicted latents.
struct LossResult {
  double value = 0.0;
  Matrix grad;
};

/// Mean cosine distance between each input embedding and the embedding
/// re-extracted from generate(se_pred). Gradients pass through the frozen
/// world into se_pred only.
LossResult loss_sem_cons(const Matrix& cie_input, const Matrix& se_pred, const ToyWorld& world);
/// Batch mean of the per-sample L1 norm of (se_pred - se_true).
LossResult loss_l1(const Matrix& se_pred, const Matrix& se_true);
/// Batch mean of |mean(s)| + |std(s) - 1|, statistics taken across each
/// sample's components with the population (1/d) standard deviation.
LossResult loss_reg(const Matrix& se_pred);

struct LossWeights {
  double sem_cons = 1.0;
  double l1 = 0.3;
  double reg = 0.3;
};

double total_loss(double sem_cons, double l1, double reg, const LossWeights& weights);

struct TrainConfig {
  std::uint64_t iterations = 5000;
  int batch_size = 16;
  double lr_max = 1e-4;
  double lr_min = 1e-7;
  LossWeights weights;
  std::uint64_t data_seed = 1;
  std::uint64_t init_seed = 2;
  double holdout_fraction = 0.05;
  bool record_batches = false;

  void validate() const;
  nn::Schedule schedule() const;
};

struct HistoryEntry {
  double total = 0.0;
  double sem_cons = 0.0;
  double l1 = 0.0;
  double reg = 0.0;
  double lr = 0.0;
};

struct Metrics {
  double mean_cie_cosine_distance = 0.0;
  double mean_abs_mean_of_se_pred = 0.0;
  double mean_abs_std_minus_one = 0.0;
  std::vector<HistoryEntry> history;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> holdout;
};

/// Seeded permutation of [0, n); the first ceil(n * fraction) indices form
/// the holdout. Both lists are returned sorted.
Split split_holdout(std::size_t n, double fraction, std::uint64_t seed);

struct TrainResult {
  Metrics metrics;  // held-out evaluation of the final network, plus the loss history
  Split split;
  nn::AdamState adam;
  std::vector<std::vector<std::size_t>> batches;  // filled when record_batches
};

TrainResult train(C2SNetwork& net, const PairDataset& data, const ToyWorld& world,
                  const TrainConfig& config);

Metrics evaluate(const C2SNetwork& net, const ToyWorld& world, const PairDataset& data,
                 std::span<const std::size_t> holdout);

/// Per-sample statistics of predicted latents, averaged over rows.
struct LatentStats {
  double mean_abs_mean = 0.0;
  double mean_abs_std_minus_one = 0.0;
};
LatentStats latent_stats(const Matrix& se);

struct Translation {
  Embedding cte_input;
  Vector cie_input;
  Vector se;
  Vector image;
  Embedding cie_rebuilt;
  double similarity = 0.0;
};

Translation translate(const ToyWorld& world, const PromptPair& prompts, const C2SNetwork& net,
                      const Embedding& cte_input, const ProjectionConfig& config = {});
Translation translate(const ToyWorld& world, const PromptPair& prompts, const C2SNetwork& net,
                      const Vector& attrs, const ProjectionConfig& config = {});

}  // namespace pcmf
