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
#include <cstdint>
#include <span>
#include <string>

#include "lblm/discriminator.hpp"
#include "lblm/pose.hpp"
#include "lblm/tensor.hpp"

namespace lblm::metrics {

struct GaussianStats {
  Tensor mu;     // d
  Tensor sigma;  // d x d
  std::size_t n = 0;
};

// Rows of `samples` (n x d) are observations. Unbiased covariance, symmetrised.
GaussianStats fit_stats(const Tensor& samples);

// ||mu_r - mu_g||^2 + Tr(S_r + S_g - 2 (S_r S_g)^{1/2}), with the square root
// taken as sqrt(sqrt(S_r) S_g sqrt(S_r)) in symmetric form.
double frechet_distance(const GaussianStats& r, const GaussianStats& g);

// Symmetric positive semi-definite square root; negative eigenvalues are
// clamped to zero.
Tensor sqrt_psd(const Tensor& s);

using Corpus = std::span<const Tensor>;  // each element is T_i x D

// All frames of all sequences stacked, then embedded row-wise.
Tensor embed_corpus(Corpus corpus, const pose::PoseEmbeddingMatrix& embed);

double fgd(Corpus real, Corpus gen, const pose::PoseEmbeddingMatrix& embed);

// Fixed random temporal convolution used as the feature space for FID. The
// weights are a pure function of (seed, pose_dim).
struct FeatureNet {
  std::uint64_t seed = 0;
  std::size_t width = 3;
  Tensor w;     // features x (width * D)
  Tensor bias;  // features

  static FeatureNet create(std::uint64_t seed, std::size_t pose_dim, std::size_t features = 16,
                           std::size_t width = 3);
  // One feature row per frame (zero-padded window centred on the frame).
  Tensor features(const Tensor& frames) const;
};

double fid(Corpus real, Corpus gen, const FeatureNet& net);

// Mean pairwise Euclidean distance between rows.
double apd(const Tensor& poses);
// Over every frame of every sequence pooled.
double apd(Corpus gen);

// Mean discriminator probability; `d` null means no trained discriminator.
double grs(Corpus gen, const disc::Discriminator* d);

enum class GdiMode { kRaw, kNormalized };
GdiMode parse_gdi_mode(const std::string& name);

// Mean pairwise distance between time-pooled sequence embeddings.
double gdi(Corpus gen, const pose::PoseEmbeddingMatrix& embed, GdiMode mode = GdiMode::kNormalized);
double gdi_from_embeddings(const Tensor& pooled, GdiMode mode);

}  // namespace lblm::metrics
