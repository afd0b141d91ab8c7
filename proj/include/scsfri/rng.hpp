// SPDX-License-Identifier: Apache-2.0
//
// scsfri: sparse common-support multipath channel estimation (SCS-FRI)
// Copyright (C) 2026 The scsfri authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cmath>
#include <cstdint>

#include "scsfri/types.hpp"

namespace scsfri {

/// splitmix64 finalizer (Steele, Lea, Flood / Vigna).
constexpr inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Seed-splitting contract used by every Monte-Carlo driver in this library:
/// stream `i` of a base seed is `mix_seed(base, i)`. Parallel trial loops must
/// derive their per-trial seed this way so that results do not depend on the
/// number of worker threads.
constexpr inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  return mix64(base + 0x9E3779B97F4A7C15ull * (stream + 1));
}

/// Small deterministic generator (a splitmix64 stream).
///
/// Intentionally not std::mt19937 / std::normal_distribution: those are
/// implementation-defined, and experiment CSVs are compared byte-for-byte.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix64(state_);
  }

  /// Uniform on [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Standard normal via Box-Muller; the paired sample is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Circularly-symmetric complex normal with E|z|^2 = 1.
  cplx complex_normal() { return {normal() * M_SQRT1_2, normal() * M_SQRT1_2}; }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace scsfri
