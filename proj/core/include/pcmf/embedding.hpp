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

#include <Eigen/Dense>

#include <cstdint>
#include <string_view>

#include "pcmf/rng.hpp"

namespace pcmf {

using Vector = Eigen::VectorXd;
/// Batch matrices are (batch_size x features), one sample per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Modality { Text, Image, Latent };

std::string_view modality_name(Modality m) noexcept;

/// Relative tolerance of the sqrt(d) length invariant for Text/Image.
inline constexpr double kLengthTolerance = 1e-9;
/// Norms below this are treated as the zero vector.
inline constexpr double kZeroNorm = 1e-12;

/// A d-dimensional vector tagged with the space it lives in.
///
/// Text and Image embeddings always have Euclidean length sqrt(d); Latent
/// embeddings are unconstrained. The constructor validates both.
class Embedding {
 public:
  Embedding(Vector values, Modality modality);

  const Vector& values() const noexcept { return values_; }
  Modality modality() const noexcept { return modality_; }
  Eigen::Index dim() const noexcept { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_[i]; }

 private:
  Vector values_;
  Modality modality_;
};

[[noreturn]] void throw_non_finite(std::string_view what);

template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& values, std::string_view what) {
  if (!values.allFinite()) throw_non_finite(what);
}

/// Rescales v to length sqrt(dim(v)). Throws ZeroVector / NonFinite.
Embedding normalize_to_sqrt_d(const Eigen::Ref<const Vector>& v, Modality modality);
Vector normalized_values(const Eigen::Ref<const Vector>& v);

double cosine_similarity(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);
double cosine_similarity(const Embedding& a, const Embedding& b);
double cosine_distance(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);
double cosine_distance(const Embedding& a, const Embedding& b);

/// d i.i.d. standard normal draws. Throws InvalidArgument when d < 1.
Embedding sample_latent(SeededRng& rng, Eigen::Index d);

}  // namespace pcmf
