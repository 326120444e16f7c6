/*
 * Copyright 2026 The lblm-ava Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <cstdint>

#include "lblm/tensor.hpp"

namespace lblm {

// Philox4x32-10 counter-based generator. A stream is identified by a 64-bit
// key; split(i) derives an independent child key so parallel workers can draw
// from (seed, index) without sharing state.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "philox4x32-10";

  explicit Rng(std::uint64_t seed = 0) : key_(seed) {}

  Rng split(std::uint64_t stream) const;

  std::uint64_t next_u64();
  // Uniform in [0, 1).
  double uniform();
  double normal();

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }
  static Rng restore(std::uint64_t key, std::uint64_t counter);

 private:
  std::array<std::uint32_t, 4> block(std::uint64_t ctr) const;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

// i.i.d. standard normal entries drawn from `rng` in row-major order.
Tensor gaussian_sample(Rng& rng, const Shape& shape);
Tensor uniform_sample(Rng& rng, const Shape& shape, double lo, double hi);

}  // namespace lblm
