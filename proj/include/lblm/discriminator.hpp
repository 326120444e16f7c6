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

#include <cstddef>
#include <span>
#include <string>

#include "lblm/autodiff.hpp"
#include "lblm/params.hpp"
#include "lblm/rng.hpp"
#include "lblm/tensor.hpp"

namespace lblm::disc {

inline constexpr double kLogitClamp = 30.0;

// Maps a T x D frame matrix to a probability that it is real.
class Discriminator {
 public:
  virtual ~Discriminator() = default;
  // Raw score before clamping.
  virtual double logit(const Tensor& frames) const = 0;
  // sigmoid(clamp(logit, -30, 30)); strictly inside (0, 1).
  double probability(const Tensor& frames) const;
};

template <typename T>
struct MlpWeights {
  T w_1, b_1;  // hidden x 2D: per-frame [pose, velocity]
  T w_2, b_2;  // hidden x hidden, after time pooling
  T w_3, b_3;  // 1 x hidden
  // Fixed standardisation of the 2D input features, (x - shift) * scale.
  T in_shift, in_scale;
};

// Trainable weights live under `prefix`; the input standardisation under
// "fixed.<prefix>" and is never updated. Without shift/scale the features
// pass through unchanged.
void init_discriminator(ParamStore& store, std::size_t pose_dim, std::size_t hidden, const Rng& master,
                        const Tensor* shift = nullptr, const Tensor* scale = nullptr,
                        const std::string& prefix = "disc");
MlpWeights<Tensor> load_discriminator(const ParamStore& store, const std::string& prefix = "disc");
MlpWeights<ad::Var> bind_discriminator(Binder& binder, const std::string& prefix = "disc");

// Backward differences with v_0 = 0, as a T x T matrix.
Tensor velocity_matrix(std::size_t frames);

// Logit bounded to (-30, 30) by 30 tanh(raw / 30), 1 x 1.
ad::Var logit(ad::Var frames, const MlpWeights<ad::Var>& w);

class MlpDiscriminator final : public Discriminator {
 public:
  explicit MlpDiscriminator(MlpWeights<Tensor> w) : w_(std::move(w)) {}
  double logit(const Tensor& frames) const override;

 private:
  MlpWeights<Tensor> w_;
};

// -mean log D(fake).
double generator_loss(std::span<const Tensor> fake, const Discriminator& d);
// -mean log D(real) - mean log(1 - D(fake)).
double discriminator_loss(std::span<const Tensor> real, std::span<const Tensor> fake, const Discriminator& d);

// Differentiable forms over clamped logits (each 1 x 1).
ad::Var generator_loss(std::span<const ad::Var> fake_logits);
ad::Var discriminator_loss(std::span<const ad::Var> real_logits, std::span<const ad::Var> fake_logits);

}  // namespace lblm::disc
