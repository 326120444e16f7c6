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
#include <vector>

#include "lblm/autodiff.hpp"
#include "lblm/params.hpp"
#include "lblm/pose.hpp"
#include "lblm/rng.hpp"
#include "lblm/tensor.hpp"

namespace lblm::post {

enum class SmoothingMode {
  kPaperLiteral,      // divide by K
  kKernelNormalized,  // divide by the sum of kernel weights
};

SmoothingMode parse_smoothing_mode(const std::string& name);
std::string smoothing_mode_name(SmoothingMode m);

struct SmoothingConfig {
  std::size_t filter_size = 5;
  double sigma = 1.0;
  SmoothingMode mode = SmoothingMode::kKernelNormalized;
};

void validate(const SmoothingConfig& cfg);

// Weights w_k = exp(-k^2 / (2 sigma^2)) for k = -K/2 .. K/2, already divided
// by the mode's normaliser.
std::vector<double> smoothing_kernel(const SmoothingConfig& cfg);

// Velocity-domain smoothing of a T x D frame matrix; the first frame is kept.
Tensor smooth_frames(const Tensor& frames, const SmoothingConfig& cfg);
pose::PoseSequence smooth(const pose::PoseSequence& g, const SmoothingConfig& cfg);
// The same map as a T x T matrix M with smooth_frames(G) = M G.
Tensor smoothing_matrix(std::size_t frames, const SmoothingConfig& cfg);

template <typename T>
struct AlignmentParams {
  T w_q;  // d_k x d_s
  T w_k;  // d_k x D
};

void init_alignment(ParamStore& store, std::size_t key_dim, std::size_t source_dim, std::size_t pose_dim,
                    const Rng& master, const std::string& prefix = "align");
AlignmentParams<Tensor> load_alignment(const ParamStore& store, const std::string& prefix = "align");
AlignmentParams<ad::Var> bind_alignment(Binder& binder, const std::string& prefix = "align");

// A = softmax(Q Kᵀ / sqrt(d_k)), Q = S W_qᵀ, K = G W_kᵀ; L x T.
Tensor alignment_weights(const Tensor& s, const Tensor& g, const AlignmentParams<Tensor>& p);
Tensor align_frames(const Tensor& s, const Tensor& g, const AlignmentParams<Tensor>& p);
pose::PoseSequence align(const Tensor& s, const pose::PoseSequence& g, const AlignmentParams<Tensor>& p);
ad::Var align(ad::Var s, ad::Var g, const AlignmentParams<ad::Var>& p);

// Every frame through pose::enforce_constraints.
pose::PoseSequence finalize(const pose::PoseSequence& g);

enum class Order { kSmoothThenAlign, kAlignThenSmooth };
Order parse_order(const std::string& name);
std::string order_name(Order o);

struct PostConfig {
  SmoothingConfig smoothing;
  bool smoothing_enabled = true;
  bool align_enabled = true;
  bool constraints_enabled = true;
  std::size_t align_key_dim = 16;
  Order order = Order::kSmoothThenAlign;
};

}  // namespace lblm::post
