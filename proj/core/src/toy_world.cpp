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

#include "pcmf/toy_world.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "pcmf/error.hpp"

namespace pcmf {

void ToyWorldConfig::validate() const {
  if (d_z < 2 || d_img < 2 || d_sem < 2 || d_emb < 2 || hidden < 2) {
    throw Error(Errc::RangeError, "toy world dimensions must all be >= 2");
  }
  if (!std::isfinite(gap_scale) || gap_scale < 0.0) {
    throw Error(Errc::RangeError, "gap_scale must be finite and >= 0");
  }
}

namespace {

Matrix draw(SeededRng& rng, int rows, int cols, double stddev) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = stddev * rng.normal();
  }
  return m;
}

Vector draw_unit(SeededRng& rng, int n) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  return v / v.norm();
}

class Fnv1a {
 public:
  void bytes(std::uint64_t word) {
    for (int i = 0; i < 8; ++i) {
      hash_ ^= (word >> (8 * i)) & 0xFFu;
      hash_ *= 0x100000001B3ull;
    }
  }
  void real(double v) { bytes(std::bit_cast<std::uint64_t>(v)); }
  void matrix(const Matrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) real(m.data()[i]);
  }
  void vector(const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) real(v[i]);
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xCBF29CE484222325ull;
};

// Row-wise x * w^T with a fixed accumulation order.
Matrix affine_rows(const Matrix& x, const Matrix& w) {
  Matrix y(x.rows(), w.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index o = 0; o < w.rows(); ++o) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < w.cols(); ++k) acc += x(r, k) * w(o, k);
      y(r, o) = acc;
    }
  }
  return y;
}

// Row-wise g * w (gradient through x * w^T).
Matrix affine_rows_vjp(const Matrix& g, const Matrix& w) {
  Matrix y(g.rows(), w.cols());
  for (Eigen::Index r = 0; r < g.rows(); ++r) {
    for (Eigen::Index k = 0; k < w.cols(); ++k) {
      double acc = 0.0;
      for (Eigen::Index o = 0; o < w.rows(); ++o) acc += g(r, o) * w(o, k);
      y(r, k) = acc;
    }
  }
  return y;
}

Matrix tanh_of(const Matrix& m) { return m.array().tanh().matrix(); }

// grad * (1 - t^2) where t = tanh(.)
Matrix tanh_vjp(const Matrix& t, const Matrix& grad) {
  return (grad.array() * (1.0 - t.array().square())).matrix();
}

void check_cols(const Matrix& m, int cols, const char* what) {
  if (m.cols() != cols) {
    throw Error(Errc::ShapeMismatch, std::string(what) + ": expected width " +
                                         std::to_string(cols) + ", got " +
                                         std::to_string(m.cols()));
  }
}

Matrix row_of(const Vector& v) { return v.transpose(); }

}  // namespace

ToyWorld::ToyWorld(const ToyWorldConfig& config) : config_(config) {
  config_.validate();
  SeededRng rng(config_.seed);
  const auto inv_sqrt = [](int n) { return 1.0 / std::sqrt(static_cast<double>(n)); };
  v1_ = draw(rng, config_.hidden, config_.d_z, inv_sqrt(config_.d_z));
  v2_ = draw(rng, config_.d_img, config_.hidden, inv_sqrt(config_.hidden));
  u_ = draw(rng, config_.d_sem, config_.d_img, inv_sqrt(config_.d_img));
  // Scaled by 1/sqrt(d_sem * d_emb) so |P a| stays O(|a| / sqrt(d_sem)): the
  // semantic spread is comparable to a unit offset and embeddings of one
  // modality share a cone around their offset direction.
  p_ = draw(rng, config_.d_emb, config_.d_sem, inv_sqrt(config_.d_sem * config_.d_emb));
  m_text_ = draw_unit(rng, config_.d_emb);
  m_image_ = draw_unit(rng, config_.d_emb);

  Fnv1a h;
  h.bytes(config_.seed);
  for (int dim : {config_.d_z, config_.d_img, config_.d_sem, config_.d_emb, config_.hidden}) {
    h.bytes(static_cast<std::uint64_t>(dim));
  }
  h.real(config_.gap_scale);
  h.matrix(v1_);
  h.matrix(v2_);
  h.matrix(u_);
  h.matrix(p_);
  h.vector(m_text_);
  h.vector(m_image_);
  fingerprint_ = h.value();
}

Matrix ToyWorld::generate(const Matrix& z) const {
  check_cols(z, config_.d_z, "toy_generate");
  require_finite(z, "toy_generate");
  return tanh_of(affine_rows(tanh_of(affine_rows(z, v1_)), v2_));
}

Vector ToyWorld::generate(const Vector& z) const { return generate(row_of(z)).row(0).transpose(); }

Matrix ToyWorld::attributes(const Matrix& x) const {
  check_cols(x, config_.d_img, "attributes");
  require_finite(x, "attributes");
  return tanh_of(affine_rows(x, u_));
}

Vector ToyWorld::attributes_of(const Vector& z) const {
  return attributes(generate(row_of(z))).row(0).transpose();
}

Matrix ToyWorld::embed(const Matrix& attrs, const Vector& offset) const {
  Matrix u = affine_rows(attrs, p_);
  const double scale = std::sqrt(static_cast<double>(config_.d_emb));
  for (Eigen::Index r = 0; r < u.rows(); ++r) {
    u.row(r) += config_.gap_scale * offset.transpose();
    const double norm = u.row(r).norm();
    if (norm < kZeroNorm) {
      throw Error(Errc::ZeroVector, "toy encoder: embedding vanishes before normalization");
    }
    u.row(r) *= scale / norm;
  }
  return u;
}

Matrix ToyWorld::encode_image(const Matrix& x) const { return embed(attributes(x), m_image_); }

Embedding ToyWorld::encode_image(const Vector& x) const {
  return Embedding(encode_image(row_of(x)).row(0).transpose(), Modality::Image);
}

Matrix ToyWorld::encode_text(const Matrix& attrs) const {
  check_cols(attrs, config_.d_sem, "toy_encode_text");
  require_finite(attrs, "toy_encode_text");
  return embed(attrs, m_text_);
}

Embedding ToyWorld::encode_text(const Vector& attrs) const {
  return Embedding(encode_text(row_of(attrs)).row(0).transpose(), Modality::Text);
}

Matrix ToyWorld::rebuild(const Matrix& z) const { return encode_image(generate(z)); }

Matrix ToyWorld::generate_vjp(const Matrix& z, const Matrix& grad_x) const {
  check_cols(z, config_.d_z, "generate_vjp");
  check_cols(grad_x, config_.d_img, "generate_vjp");
  const Matrix h = tanh_of(affine_rows(z, v1_));
  const Matrix x = tanh_of(affine_rows(h, v2_));
  const Matrix grad_h = affine_rows_vjp(tanh_vjp(x, grad_x), v2_);
  return affine_rows_vjp(tanh_vjp(h, grad_h), v1_);
}

Matrix ToyWorld::encode_image_vjp(const Matrix& x, const Matrix& grad_cie) const {
  check_cols(x, config_.d_img, "encode_image_vjp");
  check_cols(grad_cie, config_.d_emb, "encode_image_vjp");
  const Matrix a = attributes(x);
  Matrix u = affine_rows(a, p_);
  const double scale = std::sqrt(static_cast<double>(config_.d_emb));
  Matrix grad_u(u.rows(), u.cols());
  for (Eigen::Index r = 0; r < u.rows(); ++r) {
    u.row(r) += config_.gap_scale * m_image_.transpose();
    const double norm = u.row(r).norm();
    if (norm < kZeroNorm) {
      throw Error(Errc::ZeroVector, "toy encoder: embedding vanishes before normalization");
    }
    const Eigen::RowVectorXd unit = u.row(r) / norm;
    const Eigen::RowVectorXd g = grad_cie.row(r);
    grad_u.row(r) = (scale / norm) * (g - g.dot(unit) * unit);
  }
  const Matrix grad_a = affine_rows_vjp(grad_u, p_);
  return affine_rows_vjp(tanh_vjp(a, grad_a), u_);
}

Matrix ToyWorld::rebuild_vjp(const Matrix& z, const Matrix& grad_cie) const {
  return generate_vjp(z, encode_image_vjp(generate(z), grad_cie));
}

Vector neutral_attributes(const ToyWorld& world) {
  return Vector::Zero(world.config().d_sem);
}

PairDataset generate_pairs(const ToyWorld& world, std::size_t n, std::uint64_t seed) {
  const int d_z = world.config().d_z;
  PairDataset data;
  data.seed = seed;
  data.world_fingerprint = world.fingerprint();
  data.d_z = d_z;
  data.d_emb = world.config().d_emb;
  data.se.resize(static_cast<Eigen::Index>(n), d_z);
  for (std::size_t i = 0; i < n; ++i) {
    SeededRng rng = SeededRng::derive(seed, i);
    for (int k = 0; k < d_z; ++k) data.se(static_cast<Eigen::Index>(i), k) = rng.normal();
  }
  data.cie = n == 0 ? Matrix(0, data.d_emb) : world.rebuild(data.se);
  return data;
}

void require_matching_world(const PairDataset& data, const ToyWorld& world) {
  if (data.world_fingerprint != world.fingerprint()) {
    throw Error(Errc::FingerprintMismatch, "pair dataset was generated by a different world");
  }
}

}  // namespace pcmf
