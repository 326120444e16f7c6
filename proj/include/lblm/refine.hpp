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
#include <string>

#include "lblm/autodiff.hpp"
#include "lblm/params.hpp"
#include "lblm/rng.hpp"
#include "lblm/tensor.hpp"

namespace lblm::refine {

struct RefinerConfig {
  std::size_t heads = 4;
  std::size_t qk_dim = 16;
  double temperature = 1.0;
  bool enable_mha = true;
  bool enable_weighted = true;
};

void validate(const RefinerConfig& cfg);
// Per-head width for pose width `dim`: floor(dim / heads).
std::size_t head_dim(std::size_t dim, std::size_t heads);

// Multi-head self-attention over pose frames. W_q, W_k, W_v are
// (heads * d_h) x D; W_o maps the concatenated heads back to D.
template <typename T>
struct MhaWeights {
  T w_q, w_k, w_v, w_o, b_o;
};

// Query/key maps (qk_dim x D) and log of the sharpness beta.
template <typename T>
struct WeightedWeights {
  T w_q, w_k, log_beta;
};

void init_refiner(ParamStore& store, const RefinerConfig& cfg, std::size_t dim, const Rng& master,
                  const std::string& prefix = "refine");
MhaWeights<Tensor> load_mha(const ParamStore& store, const std::string& prefix = "refine");
WeightedWeights<Tensor> load_weighted(const ParamStore& store, const std::string& prefix = "refine");
MhaWeights<ad::Var> bind_mha(Binder& binder, const std::string& prefix = "refine");
WeightedWeights<ad::Var> bind_weighted(Binder& binder, const std::string& prefix = "refine");
double learned_beta(const WeightedWeights<Tensor>& w);

ad::Var refine_mha(ad::Var p, const MhaWeights<ad::Var>& w, std::size_t heads);
ad::Var refine_weighted(ad::Var p, const WeightedWeights<ad::Var>& w);

Tensor refine_mha(const Tensor& p, const MhaWeights<Tensor>& w, std::size_t heads);
// alpha = softmax_rows(beta * q kᵀ) with q = p W_qᵀ, k = p W_kᵀ.
Tensor weighted_attention(const Tensor& p, const Tensor& w_q, const Tensor& w_k, double beta);
Tensor refine_weighted(const Tensor& p, const Tensor& w_q, const Tensor& w_k, double beta);

}  // namespace lblm::refine
