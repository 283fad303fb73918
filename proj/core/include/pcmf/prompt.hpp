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

#include <span>
#include <string>

#include "pcmf/embedding.hpp"
#include "pcmf/toy_world.hpp"

namespace pcmf {

struct PromptProvenance {
  std::string text_source;          // a description, or "set-average"
  std::size_t image_set_size = 0;   // embeddings averaged into the image prompt
};

/// The (text prompt, image prompt) pair anchoring the two embedding spaces.
struct PromptPair {
  Embedding cte_prompt;
  Embedding cie_prompt;
  PromptProvenance provenance;

  PromptPair(Embedding cte, Embedding cie, PromptProvenance prov);
};

struct ProjectionConfig {
  double alpha_translate = 1.75;
  double alpha_manipulate_min = 0.05;
  double alpha_manipulate_max = 0.7;
  bool renormalize_output = true;

  void validate() const;
};

inline constexpr double kDegeneratePromptNorm = 1e-10;

/// Mean cosine similarity between `candidate` and each set member.
double average_cosine_objective(const Eigen::Ref<const Vector>& candidate,
                                std::span<const Embedding> set);
double average_cosine_objective(const Eigen::Ref<const Vector>& candidate,
                                std::span<const Vector> set);

/// The direction maximizing average_cosine_objective over the unit sphere:
/// the arithmetic mean of the members, rescaled to length sqrt(d). Members are
/// used as given, so pass normalized embeddings to weight them equally.
Embedding compute_set_prompt(std::span<const Embedding> set, Modality modality);
Embedding compute_set_prompt(std::span<const Vector> set, Modality modality);
/// Rows of `set` are the members.
Embedding compute_set_prompt(const Matrix& set, Modality modality);

Embedding text_prompt_from_attributes(const ToyWorld& world, const Vector& attrs);

/// cie_prompt + alpha * (cte_input - cte_prompt), before any renormalization.
Vector project_text_to_image_raw(const Embedding& cte_input, const PromptPair& prompts,
                                 double alpha);
/// The raw projection rescaled to length sqrt(d).
Embedding project_text_to_image(const Embedding& cte_input, const PromptPair& prompts,
                                double alpha);

/// cie_origin + alpha * (cte_target - cte_origin), before any renormalization.
Vector manipulate_raw(const Embedding& cie_origin, const Embedding& cte_origin,
                      const Embedding& cte_target, double alpha);
Embedding manipulate(const Embedding& cie_origin, const Embedding& cte_origin,
                     const Embedding& cte_target, double alpha);

/// Applies `config.renormalize_output` to a raw projection result.
Vector finish_projection(const Vector& raw, const ProjectionConfig& config);

}  // namespace pcmf
