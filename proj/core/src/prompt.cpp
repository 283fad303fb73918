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

#include "pcmf/prompt.hpp"

#include <cmath>

#include "pcmf/error.hpp"

namespace pcmf {

PromptPair::PromptPair(Embedding cte, Embedding cie, PromptProvenance prov)
    : cte_prompt(std::move(cte)), cie_prompt(std::move(cie)), provenance(std::move(prov)) {
  if (cte_prompt.modality() != Modality::Text || cie_prompt.modality() != Modality::Image) {
    throw Error(Errc::InvalidArgument, "prompt pair needs a text and an image embedding");
  }
  if (cte_prompt.dim() != cie_prompt.dim()) {
    throw Error(Errc::DimensionMismatch, "prompt embeddings differ in dimension");
  }
}

void ProjectionConfig::validate() const {
  if (!(alpha_translate >= 1.0 && alpha_translate <= 2.0)) {
    throw Error(Errc::RangeError, "alpha must lie in [1, 2]");
  }
  if (!(alpha_manipulate_min >= 0.0 && alpha_manipulate_min <= alpha_manipulate_max)) {
    throw Error(Errc::RangeError, "manipulation alpha range is invalid");
  }
}

namespace {

template <typename Get>
double mean_cosine(const Eigen::Ref<const Vector>& candidate, std::size_t n, Get get) {
  if (n == 0) throw Error(Errc::EmptySet, "average_cosine_objective: empty set");
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += cosine_similarity(candidate, get(i));
  return sum / static_cast<double>(n);
}

Embedding prompt_from_mean(const Vector& sum, std::size_t n, Modality modality) {
  const Vector mean = sum / static_cast<double>(n);
  if (mean.norm() < kDegeneratePromptNorm) {
    throw Error(Errc::DegeneratePromptSet, "set members cancel; the mean has no direction");
  }
  return normalize_to_sqrt_d(mean, modality);
}

void same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) throw Error(Errc::DimensionMismatch, std::string(what) + ": dimensions differ");
}

}  // namespace

double average_cosine_objective(const Eigen::Ref<const Vector>& candidate,
                                std::span<const Embedding> set) {
  return mean_cosine(candidate, set.size(), [&](std::size_t i) -> const Vector& {
    return set[i].values();
  });
}

double average_cosine_objective(const Eigen::Ref<const Vector>& candidate,
                                std::span<const Vector> set) {
  return mean_cosine(candidate, set.size(), [&](std::size_t i) -> const Vector& { return set[i]; });
}

Embedding compute_set_prompt(std::span<const Embedding> set, Modality modality) {
  if (set.empty()) throw Error(Errc::EmptySet, "compute_set_prompt: empty set");
  Vector sum = Vector::Zero(set.front().dim());
  for (const auto& e : set) {
    same_dim(e.dim(), sum.size(), "compute_set_prompt");
    sum += e.values();
  }
  return prompt_from_mean(sum, set.size(), modality);
}

Embedding compute_set_prompt(std::span<const Vector> set, Modality modality) {
  if (set.empty()) throw Error(Errc::EmptySet, "compute_set_prompt: empty set");
  Vector sum = Vector::Zero(set.front().size());
  for (const auto& v : set) {
    same_dim(v.size(), sum.size(), "compute_set_prompt");
    require_finite(v, "compute_set_prompt");
    sum += v;
  }
  return prompt_from_mean(sum, set.size(), modality);
}

Embedding compute_set_prompt(const Matrix& set, Modality modality) {
  if (set.rows() == 0) throw Error(Errc::EmptySet, "compute_set_prompt: empty set");
  require_finite(set, "compute_set_prompt");
  Vector sum = Vector::Zero(set.cols());
  for (Eigen::Index r = 0; r < set.rows(); ++r) sum += set.row(r).transpose();
  return prompt_from_mean(sum, static_cast<std::size_t>(set.rows()), modality);
}

Embedding text_prompt_from_attributes(const ToyWorld& world, const Vector& attrs) {
  if (attrs.size() != world.config().d_sem) {
    throw Error(Errc::DimensionMismatch, "attribute vector has the wrong dimension");
  }
  return world.encode_text(attrs);
}

Vector project_text_to_image_raw(const Embedding& cte_input, const PromptPair& prompts,
                                 double alpha) {
  same_dim(cte_input.dim(), prompts.cte_prompt.dim(), "project_text_to_image");
  if (!std::isfinite(alpha)) throw Error(Errc::NonFinite, "alpha is not finite");
  return prompts.cie_prompt.values() + alpha * (cte_input.values() - prompts.cte_prompt.values());
}

namespace {

Embedding renormalized(const Vector& raw) {
  if (raw.norm() < kZeroNorm) {
    throw Error(Errc::DegenerateProjection, "projection result vanishes");
  }
  return normalize_to_sqrt_d(raw, Modality::Image);
}

}  // namespace

Embedding project_text_to_image(const Embedding& cte_input, const PromptPair& prompts,
                                double alpha) {
  return renormalized(project_text_to_image_raw(cte_input, prompts, alpha));
}

Vector manipulate_raw(const Embedding& cie_origin, const Embedding& cte_origin,
                      const Embedding& cte_target, double alpha) {
  same_dim(cie_origin.dim(), cte_origin.dim(), "manipulate");
  same_dim(cie_origin.dim(), cte_target.dim(), "manipulate");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw Error(Errc::RangeError, "manipulation strength must be finite and >= 0");
  }
  return cie_origin.values() + alpha * (cte_target.values() - cte_origin.values());
}

Embedding manipulate(const Embedding& cie_origin, const Embedding& cte_origin,
                     const Embedding& cte_target, double alpha) {
  const Vector raw = manipulate_raw(cie_origin, cte_origin, cte_target, alpha);
  // A zero edit returns the origin untouched; rescaling an embedding that
  // already has length sqrt(d) could still move its last bits.
  if (raw == cie_origin.values()) return cie_origin;
  return renormalized(raw);
}

Vector finish_projection(const Vector& raw, const ProjectionConfig& config) {
  if (!config.renormalize_output) {
    if (raw.norm() < kZeroNorm) {
      throw Error(Errc::DegenerateProjection, "projection result vanishes");
    }
    return raw;
  }
  return renormalized(raw).values();
}

}  // namespace pcmf
