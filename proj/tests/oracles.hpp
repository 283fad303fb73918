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

// Test-only reference computations. Nothing here calls into the code path it
// is used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "pcmf/embedding.hpp"
#include "pcmf/nn.hpp"

namespace pcmf::oracle {

inline double relative_error(const Vector& a, const Vector& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-12});
  return (a - b).norm() / scale;
}

/// Uniform random direction scaled to `length`.
inline Vector random_direction(std::mt19937_64& gen, Eigen::Index d, double length = 1.0) {
  std::normal_distribution<double> n01;
  Vector v(d);
  do {
    for (Eigen::Index i = 0; i < d; ++i) v[i] = n01(gen);
  } while (v.norm() < 1e-6);
  return v * (length / v.norm());
}

/// Brute-force mean cosine of every candidate row against every member row.
/// Returns the best value found.
inline double best_random_candidate(const Matrix& members, std::size_t n_candidates,
                                    std::mt19937_64& gen) {
  Matrix unit_members = members;
  for (Eigen::Index r = 0; r < unit_members.rows(); ++r) {
    unit_members.row(r) /= unit_members.row(r).norm();
  }
  double best = -2.0;
  const std::size_t chunk = 4096;
  for (std::size_t start = 0; start < n_candidates; start += chunk) {
    const auto rows = static_cast<Eigen::Index>(std::min(chunk, n_candidates - start));
    Matrix cand(rows, members.cols());
    for (Eigen::Index r = 0; r < rows; ++r) {
      cand.row(r) = random_direction(gen, members.cols()).transpose();
    }
    const Eigen::VectorXd mean_cos = (cand * unit_members.transpose()).rowwise().mean();
    best = std::max(best, mean_cos.maxCoeff());
  }
  return best;
}

/// Projected gradient ascent of the mean cosine objective on the unit sphere,
/// started from `start`. Returns the final unit vector.
inline Vector ascend_mean_cosine(const Matrix& members, Vector y, int max_iters = 200000) {
  Matrix unit = members;
  for (Eigen::Index r = 0; r < unit.rows(); ++r) unit.row(r) /= unit.row(r).norm();
  const auto tangent_grad = [&](const Vector& at) {
    Vector g = Vector::Zero(at.size());
    for (Eigen::Index r = 0; r < unit.rows(); ++r) {
      const Vector x = unit.row(r).transpose();
      g += x - x.dot(at) * at;  // gradient of cos(at, x) projected onto the tangent plane
    }
    return Vector(g / static_cast<double>(unit.rows()));
  };
  const auto objective = [&](const Vector& at) {
    return (unit * at).mean();
  };
  y /= y.norm();
  // Monotone ascent with an adaptive step: grow after a successful move,
  // halve after a rejected one.
  double step = 1.0;
  double value = objective(y);
  for (int it = 0; it < max_iters && step > 1e-300; ++it) {
    Vector next = y + step * tangent_grad(y);
    next /= next.norm();
    const double next_value = objective(next);
    if (next_value < value) {
      step *= 0.5;
      continue;
    }
    const double moved = (next - y).norm();
    y = next;
    value = next_value;
    step *= 1.5;
    if (moved < 1e-13) break;
  }
  return y;
}

/// Mean cosine computed element by element.
inline double mean_cosine(const Vector& y, const Matrix& members) {
  double s = 0.0;
  for (Eigen::Index r = 0; r < members.rows(); ++r) {
    const Vector x = members.row(r).transpose();
    s += y.dot(x) / (y.norm() * x.norm());
  }
  return s / static_cast<double>(members.rows());
}

/// Flattens trainable parameters into one vector and back.
inline Vector flatten_trainable(const nn::ParamStore& ps) {
  std::vector<double> out;
  for (const auto& p : ps) {
    if (!p.trainable) continue;
    out.insert(out.end(), p.value.data(), p.value.data() + p.value.size());
  }
  return Eigen::Map<Vector>(out.data(), static_cast<Eigen::Index>(out.size()));
}

inline void unflatten_trainable(nn::ParamStore& ps, const Vector& flat) {
  Eigen::Index pos = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    auto& p = ps[i];
    if (!p.trainable) continue;
    std::copy(flat.data() + pos, flat.data() + pos + p.value.size(), p.value.data());
    pos += p.value.size();
  }
}

inline Vector flatten_grads(const nn::ParamStore& ps, const std::vector<Matrix>& grads) {
  std::vector<double> out;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (!ps[i].trainable) continue;
    out.insert(out.end(), grads[i].data(), grads[i].data() + grads[i].size());
  }
  return Eigen::Map<Vector>(out.data(), static_cast<Eigen::Index>(out.size()));
}

inline Vector flatten(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

inline Matrix unflatten(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

inline Matrix random_matrix(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols,
                            double scale = 1.0) {
  std::normal_distribution<double> n01;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * n01(gen);
  return m;
}

}  // namespace pcmf::oracle
