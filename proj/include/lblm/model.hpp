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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lblm/autodiff.hpp"
#include "lblm/diffusion.hpp"
#include "lblm/discriminator.hpp"
#include "lblm/encoder.hpp"
#include "lblm/params.hpp"
#include "lblm/pose.hpp"
#include "lblm/postprocess.hpp"
#include "lblm/refine.hpp"

namespace lblm::model {

struct ModelConfig {
  encoder::EncoderConfig encoder;
  diffusion::DiffusionConfig diffusion;
  refine::RefinerConfig refine;
  post::PostConfig post;
  std::size_t disc_hidden = 32;
  std::size_t text_dim = 8;
  std::size_t audio_dim = 8;
  std::size_t video_dim = 12;
  // When false the denoiser receives a zero conditioning sequence.
  bool multimodal_embed = true;
  // Start the pose decoder's bias at the corpus mean pose instead of zero.
  bool decoder_mean_init = false;
  std::uint64_t init_seed = 7;
};

void validate(const ModelConfig& cfg);

// Per-coordinate statistics of a pose corpus; the decoder is initialised to
// emit poses with these marginal moments.
struct PoseStats {
  Tensor mean;    // D
  Tensor stddev;  // D
  Tensor velocity_stddev;  // D, of frame-to-frame differences
};
PoseStats pose_stats(std::span<const pose::PoseSequence> corpus);

struct Model {
  ModelConfig config;
  pose::BodyLayout layout;
  ParamStore params;
};

Model init_model(const ModelConfig& cfg, const pose::BodyLayout& layout, const std::optional<PoseStats>& stats);

// Generator parameter names start with one of these prefixes.
bool is_generator_param(const std::string& name);
bool is_discriminator_param(const std::string& name);

struct Conditioning {
  encoder::FeatureTrack text, audio, video;
};

// Rows of the encoder output that the alignment attends from: the audio
// span, else video, else text.
struct SourceSpan {
  std::size_t begin = 0, end = 0;
  double frame_rate = 0.0;
};
SourceSpan alignment_source(const Conditioning& c);

// Initial noise for every chain of one request.
std::vector<Tensor> chain_noise(const Rng& rng, const ModelConfig& cfg, std::size_t text_rows);

// Differentiable generator: one output sequence (L x D, L = source length)
// per chain. Post-processing stops before constraint enforcement.
std::vector<ad::Var> generator_forward(Binder& binder, const Model& m, const Conditioning& c,
                                       const std::vector<Tensor>& noise);

struct GenerateOptions {
  bool postprocess = true;
  std::size_t threads = 1;
};

struct Generated {
  pose::PoseSequence sequence;
  std::size_t chain = 0;
  std::vector<double> chain_scores;  // discriminator probability per chain, if scored
};

// Inference: diffusion chains sampled with the parallel sampler, then the
// refinement and post-processing stack, then constraint enforcement.
Generated generate(const Model& m, const Conditioning& c, const Rng& rng, const GenerateOptions& opts = {});

// Decoded raw sequences (L x D) for every chain before constraints.
std::vector<Tensor> generate_raw(const Model& m, const Conditioning& c, const Rng& rng, std::size_t threads = 1);

pose::PoseEmbeddingMatrix metric_embedding(std::size_t pose_dim, std::uint64_t seed, std::size_t dim = 32);

}  // namespace lblm::model
