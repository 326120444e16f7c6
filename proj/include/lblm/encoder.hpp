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
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "lblm/autodiff.hpp"
#include "lblm/params.hpp"
#include "lblm/tensor.hpp"

namespace lblm::encoder {

enum class Modality { kText, kAudio, kVideo };

std::string_view modality_name(Modality m);
Modality parse_modality(std::string_view name);

// One modality's pre-extracted features, L x d. L may be 0 (track absent),
// in which case data has shape {0, d}.
struct FeatureTrack {
  Modality modality = Modality::kText;
  Tensor data;
  double frame_rate = 0.0;

  std::size_t length() const { return data.rank() == 2 ? data.shape()[0] : 0; }
  std::size_t width() const { return data.rank() == 2 ? data.shape()[1] : 0; }
};

struct EncoderConfig {
  std::size_t d = 64;
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t segment_len = 32;
  std::size_t pose_latent_dim = 32;
  std::size_t ffn_hidden = 128;
  // When false every segment is encoded with an empty memory.
  bool xl_memory = true;
};

void validate(const EncoderConfig& cfg);

// Projection matrices map a modality row into the shared width: row' = W · row.
template <typename T>
struct ProjectionSet {
  T w_text;   // d x d_T
  T w_audio;  // d x d_A
  T w_video;  // d x d_V
};

template <typename T>
struct XlLayerWeights {
  T w_q, w_k, w_v, w_o, b_o;
  T rel_bias;  // heads x (2 * segment_len + 1)
  T ln1_gain, ln1_bias;
  T w_ff1, b_ff1, w_ff2, b_ff2;
  T ln2_gain, ln2_bias;
};

template <typename T>
struct EncoderWeights {
  ProjectionSet<T> projections;
  std::vector<XlLayerWeights<T>> layers;
  T w_e;  // d_p x d
};

// Cached per-layer inputs of the previous segment.
struct SegmentMemory {
  std::vector<Tensor> hidden;
  std::size_t segment_index = 0;

  bool empty() const { return hidden.empty(); }
};

struct SegmentMemoryVars {
  std::vector<ad::Var> hidden;
  std::size_t segment_index = 0;

  bool empty() const { return hidden.empty(); }
};

struct PoseLatentSequence {
  Tensor data;  // L_T x d_p
};

void init_encoder(ParamStore& store, const EncoderConfig& cfg, std::size_t d_text, std::size_t d_audio,
                  std::size_t d_video, const Rng& master, const std::string& prefix = "encoder");
EncoderWeights<Tensor> load_encoder(const ParamStore& store, const EncoderConfig& cfg,
                                    const std::string& prefix = "encoder");
EncoderWeights<ad::Var> bind_encoder(Binder& binder, const EncoderConfig& cfg, const std::string& prefix = "encoder");
EncoderWeights<ad::Var> constants(ad::Graph& g, const EncoderWeights<Tensor>& w);

std::array<Tensor, 3> project_modalities(const FeatureTrack& text, const FeatureTrack& audio,
                                         const FeatureTrack& video, const ProjectionSet<Tensor>& w);
// Rows in order text, audio, video; empty tracks are skipped.
Tensor concat_tracks(const Tensor& text, const Tensor& audio, const Tensor& video);

// Self-attention sublayer over [memory; x] with relative-offset bias. Returns
// the attention output (before residual and normalisation). When `probs` is
// non-null the per-head attention matrices are appended.
ad::Var xl_attention(ad::Var x, const ad::Var* memory, const XlLayerWeights<ad::Var>& w, const EncoderConfig& cfg,
                     std::vector<Tensor>* probs = nullptr);

struct SegmentResult {
  ad::Var hidden;
  SegmentMemoryVars memory;
};

// One segment through every layer. The returned memory caches this segment's
// per-layer inputs with gradients stopped.
SegmentResult encode_segment(ad::Var x, const SegmentMemoryVars& memory, const EncoderWeights<ad::Var>& w,
                             const EncoderConfig& cfg, std::vector<Tensor>* probs = nullptr);

struct TensorSegmentResult {
  Tensor hidden;
  SegmentMemory memory;
};
TensorSegmentResult encode_segment(const Tensor& x, const SegmentMemory& memory, const EncoderWeights<Tensor>& w,
                                   const EncoderConfig& cfg);

// Splits x (L x d) into consecutive segments of cfg.segment_len rows and
// encodes them in order, carrying memory. `memory` (optional) is both the
// initial context and, on return, the memory after the last segment.
ad::Var encode_sequence(ad::Var x, const EncoderWeights<ad::Var>& w, const EncoderConfig& cfg,
                        SegmentMemoryVars* memory = nullptr);

ad::Var pose_latent(ad::Var h_text, ad::Var w_e);
PoseLatentSequence pose_latent(const Tensor& h_text, const Tensor& w_e);

}  // namespace lblm::encoder
