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

#include <cstddef>
#include <cstdint>

#include "pcmf/embedding.hpp"

namespace pcmf {

struct ToyWorldConfig {
  std::uint64_t seed = 7;
  int d_z = 16;
  int d_img = 32;
  int d_sem = 16;
  int d_emb = 16;
  int hidden = 32;
  double gap_scale = 0.5;

  void validate() const;
};

/// Frozen differentiable stand-ins for a pretrained generator and a pair of
/// aligned text/image encoders.
///
///   generate(z)      x   = tanh(V2 tanh(V1 z))
///   attributes(x)    a   = tanh(U x)
///   encode_image(x)  cie = sqrt(d) * unit(P a + gap * m_image)
///   encode_text(a)   cte = sqrt(d) * unit(P a + gap * m_text)
///
/// Batch inputs hold one sample per row. Every row is computed with the same
/// fixed-order loops, so a row's result does not depend on the batch it sits
/// in. All parameters are drawn once at construction and never change.
class ToyWorld {
 public:
  explicit ToyWorld(const ToyWorldConfig& config);

  const ToyWorldConfig& config() const noexcept { return config_; }
  /// FNV-1a over the config and the bit patterns of every parameter.
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

  Matrix generate(const Matrix& z) const;
  Vector generate(const Vector& z) const;
  Matrix attributes(const Matrix& x) const;
  Matrix encode_image(const Matrix& x) const;
  Embedding encode_image(const Vector& x) const;
  Matrix encode_text(const Matrix& attrs) const;
  Embedding encode_text(const Vector& attrs) const;
  Vector attributes_of(const Vector& z) const;

  /// encode_image(generate(z)).
  Matrix rebuild(const Matrix& z) const;

  // Vector-Jacobian products: gradient w.r.t. the input given the gradient
  // w.r.t. the output, at the point `input`.
  Matrix generate_vjp(const Matrix& z, const Matrix& grad_x) const;
  Matrix encode_image_vjp(const Matrix& x, const Matrix& grad_cie) const;
  Matrix rebuild_vjp(const Matrix& z, const Matrix& grad_cie) const;

  const Matrix& v1() const noexcept { return v1_; }
  const Matrix& v2() const noexcept { return v2_; }
  const Matrix& u() const noexcept { return u_; }
  const Matrix& p() const noexcept { return p_; }
  const Vector& m_text() const noexcept { return m_text_; }
  const Vector& m_image() const noexcept { return m_image_; }

 private:
  Matrix embed(const Matrix& attrs, const Vector& offset) const;

  ToyWorldConfig config_;
  Matrix v1_;  // hidden x d_z
  Matrix v2_;  // d_img x hidden
  Matrix u_;   // d_sem x d_img
  Matrix p_;   // d_emb x d_sem
  Vector m_text_;
  Vector m_image_;
  std::uint64_t fingerprint_ = 0;
};

inline ToyWorld build_toy_world(const ToyWorldConfig& config) { return ToyWorld(config); }

/// The attribute vector of the "normal description": all zeros.
Vector neutral_attributes(const ToyWorld& world);

/// (latent, image embedding) training pairs; row i of `se` and `cie` is record i.
struct PairDataset {
  Matrix se;
  Matrix cie;
  std::uint64_t seed = 0;
  std::uint64_t world_fingerprint = 0;
  int d_z = 0;
  int d_emb = 0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(se.rows()); }
};

/// Record i uses the latent drawn from SeededRng::derive(seed, i).
PairDataset generate_pairs(const ToyWorld& world, std::size_t n, std::uint64_t seed);

void require_matching_world(const PairDataset& data, const ToyWorld& world);

}  // namespace pcmf
