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

#include "pcmf/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pcmf/error.hpp"

namespace pcmf {

std::string_view modality_name(Modality m) noexcept {
  switch (m) {
    case Modality::Text: return "text";
    case Modality::Image: return "image";
    case Modality::Latent: return "latent";
  }
  return "unknown";
}

void throw_non_finite(std::string_view what) {
  throw Error(Errc::NonFinite, std::string(what) + ": non-finite value");
}

Embedding::Embedding(Vector values, Modality modality)
    : values_(std::move(values)), modality_(modality) {
  if (values_.size() < 1) {
    throw Error(Errc::InvalidArgument, "embedding dimension must be positive");
  }
  require_finite(values_, "embedding");
  if (modality_ != Modality::Latent) {
    const double target = std::sqrt(static_cast<double>(values_.size()));
    if (std::abs(values_.norm() - target) > kLengthTolerance * target) {
      throw Error(Errc::InvalidArgument,
                  std::string(modality_name(modality_)) +
                      " embedding must have length sqrt(d)");
    }
  }
}

Vector normalized_values(const Eigen::Ref<const Vector>& v) {
  require_finite(v, "normalize_to_sqrt_d");
  const double norm = v.norm();
  if (norm < kZeroNorm) {
    throw Error(Errc::ZeroVector, "normalize_to_sqrt_d: zero vector");
  }
  return v * (std::sqrt(static_cast<double>(v.size())) / norm);
}

Embedding normalize_to_sqrt_d(const Eigen::Ref<const Vector>& v, Modality modality) {
  return Embedding(normalized_values(v), modality);
}

double cosine_similarity(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  if (a.size() != b.size()) {
    throw Error(Errc::DimensionMismatch, "cosine_similarity: dimensions differ");
  }
  const double na = a.norm();
  const double nb = b.norm();
  if (na < kZeroNorm || nb < kZeroNorm) {
    throw Error(Errc::ZeroVector, "cosine_similarity: zero vector");
  }
  const double c = a.dot(b) / (na * nb);
  return std::clamp(c, -1.0, 1.0);
}

double cosine_similarity(const Embedding& a, const Embedding& b) {
  return cosine_similarity(a.values(), b.values());
}

double cosine_distance(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  return 1.0 - cosine_similarity(a, b);
}

double cosine_distance(const Embedding& a, const Embedding& b) {
  return cosine_distance(a.values(), b.values());
}

Embedding sample_latent(SeededRng& rng, Eigen::Index d) {
  if (d < 1) {
    throw Error(Errc::InvalidArgument, "sample_latent: dimension must be >= 1");
  }
  Vector z(d);
  for (Eigen::Index i = 0; i < d; ++i) z[i] = rng.normal();
  return Embedding(std::move(z), Modality::Latent);
}

}  // namespace pcmf
