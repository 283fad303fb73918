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
#include <optional>

namespace pcmf {

/// Counter-based pseudo random stream.
///
/// Draw k of a stream is splitmix64(seed + k * golden_gamma), so the output
/// depends only on (seed, k) and is identical on every platform. Normals use
/// the Box-Muller transform over consecutive uniform pairs; the
/// second value of each pair is cached and returned by the next call.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) noexcept : seed_(seed) {}

  /// Independent stream for item `index` of a family rooted at `seed`.
  static SeededRng derive(std::uint64_t seed, std::uint64_t index) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform in the open interval (0, 1).
  double uniform() noexcept;
  double normal() noexcept;
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  std::optional<double> spare_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace pcmf
