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

#include "pcmf/rng.hpp"

#include <cmath>
#include <numbers>

namespace pcmf {

namespace {
constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += kGoldenGamma;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

SeededRng SeededRng::derive(std::uint64_t seed, std::uint64_t index) noexcept {
  return SeededRng(splitmix64(seed ^ splitmix64(index + 0x5851F42D4C957F2Dull)));
}

std::uint64_t SeededRng::next_u64() noexcept {
  ++counter_;
  return splitmix64(seed_ + counter_ * kGoldenGamma);
}

double SeededRng::uniform() noexcept {
  // 53 random bits, shifted by half an ulp so 0 is never produced.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double SeededRng::normal() noexcept {
  if (spare_) {
    double v = *spare_;
    spare_.reset();
    return v;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  return r * std::cos(theta);
}

std::uint64_t SeededRng::below(std::uint64_t n) noexcept {
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

}  // namespace pcmf
