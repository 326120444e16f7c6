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

#include "lblm/encoder.hpp"

#include <cmath>

#include "lblm/error.hpp"

namespace lblm::encoder {
namespace {

template <typename T, typename F>
void visit_layer(XlLayerWeights<T>& w, F&& f) {
  f("attn.w_q", w.w_q);
  f("attn.w_k", w.w_k);
  f("attn.w_v", w.w_v);
  f("attn.w_o", w.w_o);
  f("attn.b_o", w.b_o);
  f("attn.rel_bias", w.rel_bias);
  f("ln1.gain", w.ln1_gain);
  f("ln1.bias", w.ln1_bias);
  f("ffn.w_1", w.w_ff1);
  f("ffn.b_1", w.b_ff1);
  f("ffn.w_2", w.w_ff2);
  f("ffn.b_2", w.b_ff2);
  f("ln2.gain", w.ln2_gain);
  f("ln2.bias", w.ln2_bias);
}

template <typename T, typename F>
void visit(EncoderWeights<T>& w, F&& f) {
  f("proj.w_text", w.projections.w_text);
  f("proj.w_audio", w.projections.w_audio);
  f("proj.w_video", w.projections.w_video);
  for (std::size_t l = 0; l < w.layers.size(); ++l) {
    const std::string lp = "layer" + std::to_string(l) + ".";
    visit_layer(w.layers[l], [&](const std::string& name, T& v) { f(lp + name, v); });
  }
  f("w_e", w.w_e);
}

Tensor project(const FeatureTrack& track, const Tensor& w, const char* what) {
  if (track.length() == 0) return Tensor({0, w.rows()});
  if (track.width() != w.cols()) {
    throw DimensionError(std::string("project_modalities: ") + what + " width " + std::to_string(track.width()) +
                         " but projection expects " + std::to_string(w.cols()));
  }
  return matmul_nt(track.data, w);
}

}  // namespace

std::string_view modality_name(Modality m) {
  switch (m) {
    case Modality::kText:
      return "text";
    case Modality::kAudio:
      return "audio";
    case Modality::kVideo:
      return "video";
  }
  return "unknown";
}

Modality parse_modality(std::string_view name) {
  if (name == "text") return Modality::kText;
  if (name == "audio") return Modality::kAudio;
  if (name == "video") return Modality::kVideo;
  throw ConfigError("unknown modality '" + std::string(name) + "'");
}

void validate(const EncoderConfig& cfg) {
  if (cfg.d == 0 || cfg.layers == 0 || cfg.heads == 0 || cfg.segment_len == 0 || cfg.pose_latent_dim == 0 ||
      cfg.ffn_hidden == 0) {
    throw ConfigError("encoder sizes must all be >= 1");
  }
  if (cfg.d % cfg.heads != 0) throw ConfigError("encoder.d must be divisible by encoder.heads");
}

void init_encoder(ParamStore& store, const EncoderConfig& cfg, std::size_t d_text, std::size_t d_audio,
                  std::size_t d_video, const Rng& master, const std::string& prefix) {
  validate(cfg);
  const std::string p = prefix + ".";
  const std::size_t d = cfg.d;
  auto linear = [&](const std::string& name, std::size_t out, std::size_t in) {
    init_normal(store, p + name, {out, in}, 1.0 / std::sqrt(static_cast<double>(in)), master);
  };
  linear("proj.w_text", d, d_text);
  linear("proj.w_audio", d, d_audio);
  linear("proj.w_video", d, d_video);
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const std::string lp = "layer" + std::to_string(l) + ".";
    linear(lp + "attn.w_q", d, d);
    linear(lp + "attn.w_k", d, d);
    linear(lp + "attn.w_v", d, d);
    linear(lp + "attn.w_o", d, d);
    init_constant(store, p + lp + "attn.b_o", {d}, 0.0);
    init_constant(store, p + lp + "attn.rel_bias", {cfg.heads, 2 * cfg.segment_len + 1}, 0.0);
    init_constant(store, p + lp + "ln1.gain", {d}, 1.0);
    init_constant(store, p + lp + "ln1.bias", {d}, 0.0);
    linear(lp + "ffn.w_1", cfg.ffn_hidden, d);
    init_constant(store, p + lp + "ffn.b_1", {cfg.ffn_hidden}, 0.0);
    linear(lp + "ffn.w_2", d, cfg.ffn_hidden);
    init_constant(store, p + lp + "ffn.b_2", {d}, 0.0);
    init_constant(store, p + lp + "ln2.gain", {d}, 1.0);
    init_constant(store, p + lp + "ln2.bias", {d}, 0.0);
  }
  linear("w_e", cfg.pose_latent_dim, d);
}

EncoderWeights<Tensor> load_encoder(const ParamStore& store, const EncoderConfig& cfg, const std::string& prefix) {
  EncoderWeights<Tensor> w;
  w.layers.resize(cfg.layers);
  visit(w, [&](const std::string& name, Tensor& t) { t = store.get(prefix + "." + name); });
  return w;
}

EncoderWeights<ad::Var> bind_encoder(Binder& binder, const EncoderConfig& cfg, const std::string& prefix) {
  EncoderWeights<ad::Var> w;
  w.layers.resize(cfg.layers);
  visit(w, [&](const std::string& name, ad::Var& v) { v = binder(prefix + "." + name); });
  return w;
}

EncoderWeights<ad::Var> constants(ad::Graph& g, const EncoderWeights<Tensor>& w) {
  EncoderWeights<Tensor> src = w;
  EncoderWeights<ad::Var> out;
  out.layers.resize(w.layers.size());
  std::vector<ad::Var*> dst;
  visit(out, [&](const std::string&, ad::Var& v) { dst.push_back(&v); });
  std::size_t i = 0;
  visit(src, [&](const std::string&, Tensor& t) { *dst[i++] = g.constant(t); });
  return out;
}

std::array<Tensor, 3> project_modalities(const FeatureTrack& text, const FeatureTrack& audio,
                                         const FeatureTrack& video, const ProjectionSet<Tensor>& w) {
  return {project(text, w.w_text, "text"), project(audio, w.w_audio, "audio"), project(video, w.w_video, "video")};
}

Tensor concat_tracks(const Tensor& text, const Tensor& audio, const Tensor& video) {
  std::size_t width = 0;
  for (const Tensor* t : {&text, &audio, &video}) {
    if (t->empty()) continue;
    if (width != 0 && t->cols() != width) throw DimensionError("concat_tracks: all tracks must share width d");
    width = t->cols();
  }
  std::vector<Tensor> parts;
  for (const Tensor* t : {&text, &audio, &video})
    if (!t->empty()) parts.push_back(*t);
  if (parts.empty()) return Tensor({0, width});
  return concat_rows(parts);
}

ad::Var xl_attention(ad::Var x, const ad::Var* memory, const XlLayerWeights<ad::Var>& w, const EncoderConfig& cfg,
                     std::vector<Tensor>* probs) {
  const std::size_t n = x.rows();
  const std::size_t m = memory ? memory->rows() : 0;
  if (x.cols() != cfg.d || (memory && memory->cols() != cfg.d)) throw DimensionError("xl_attention: width != d");
  ad::Var context = x;
  if (memory) {
    const ad::Var parts[] = {*memory, x};
    context = ad::concat_rows(parts);
  }
  const ad::Var q = ad::matmul_nt(x, w.w_q);
  const ad::Var k = ad::matmul_nt(context, w.w_k);
  const ad::Var v = ad::matmul_nt(context, w.w_v);
  const std::size_t dh = cfg.d / cfg.heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<ad::Var> heads;
  heads.reserve(cfg.heads);
  for (std::size_t h = 0; h < cfg.heads; ++h) {
    const ad::Var qh = ad::slice_cols(q, h * dh, (h + 1) * dh);
    const ad::Var kh = ad::slice_cols(k, h * dh, (h + 1) * dh);
    const ad::Var vh = ad::slice_cols(v, h * dh, (h + 1) * dh);
    ad::Var scores = ad::scale(ad::matmul_nt(qh, kh), inv_sqrt);
    scores = ad::add(scores, ad::relative_bias(w.rel_bias, h, m, n, m + n, cfg.segment_len));
    const ad::Var attn = ad::softmax_rows(scores);
    if (probs) probs->push_back(attn.value());
    heads.push_back(ad::matmul(attn, vh));
  }
  return ad::linear(ad::concat_cols(heads), w.w_o, w.b_o);
}

SegmentResult encode_segment(ad::Var x, const SegmentMemoryVars& memory, const EncoderWeights<ad::Var>& w,
                             const EncoderConfig& cfg, std::vector<Tensor>* probs) {
  if (x.rows() == 0 || x.rows() > cfg.segment_len) {
    throw ContractError("encode_segment: segment has " + std::to_string(x.rows()) + " rows, expected 1.." +
                        std::to_string(cfg.segment_len));
  }
  if (x.cols() != cfg.d) throw DimensionError("encode_segment: input width != d");
  if (!memory.empty()) {
    if (memory.hidden.size() != w.layers.size()) throw ContractError("encode_segment: memory layer count mismatch");
    for (const ad::Var& m : memory.hidden) {
      if (m.cols() != cfg.d || m.rows() > cfg.segment_len) {
        throw ContractError("encode_segment: cached memory must be at most segment_len x d");
      }
    }
  }
  SegmentResult out;
  out.memory.segment_index = memory.empty() ? 0 : memory.segment_index + 1;
  ad::Var h = x;
  for (std::size_t l = 0; l < w.layers.size(); ++l) {
    const XlLayerWeights<ad::Var>& lw = w.layers[l];
    out.memory.hidden.push_back(ad::detach(h));
    const ad::Var* mem = memory.empty() ? nullptr : &memory.hidden[l];
    const ad::Var attn = xl_attention(h, mem, lw, cfg, probs);
    const ad::Var h1 = ad::layer_norm_rows(ad::add(h, attn), lw.ln1_gain, lw.ln1_bias);
    const ad::Var ff = ad::linear(ad::gelu(ad::linear(h1, lw.w_ff1, lw.b_ff1)), lw.w_ff2, lw.b_ff2);
    h = ad::layer_norm_rows(ad::add(h1, ff), lw.ln2_gain, lw.ln2_bias);
  }
  out.hidden = h;
  return out;
}

TensorSegmentResult encode_segment(const Tensor& x, const SegmentMemory& memory, const EncoderWeights<Tensor>& w,
                                   const EncoderConfig& cfg) {
  ad::Graph g;
  const EncoderWeights<ad::Var> wv = constants(g, w);
  SegmentMemoryVars mem;
  mem.segment_index = memory.segment_index;
  for (const Tensor& t : memory.hidden) mem.hidden.push_back(g.constant(t));
  SegmentResult r = encode_segment(g.constant(x), mem, wv, cfg);
  TensorSegmentResult out{r.hidden.value(), {}};
  out.memory.segment_index = r.memory.segment_index;
  for (const ad::Var& v : r.memory.hidden) out.memory.hidden.push_back(v.value());
  return out;
}

ad::Var encode_sequence(ad::Var x, const EncoderWeights<ad::Var>& w, const EncoderConfig& cfg,
                        SegmentMemoryVars* memory) {
  SegmentMemoryVars local;
  SegmentMemoryVars& mem = memory ? *memory : local;
  std::vector<ad::Var> outputs;
  for (std::size_t begin = 0; begin < x.rows(); begin += cfg.segment_len) {
    const std::size_t end = std::min(x.rows(), begin + cfg.segment_len);
    SegmentResult r = encode_segment(ad::slice_rows(x, begin, end), cfg.xl_memory ? mem : SegmentMemoryVars{}, w, cfg);
    outputs.push_back(r.hidden);
    mem = std::move(r.memory);
  }
  if (outputs.empty()) throw ContractError("encode_sequence: empty input");
  return outputs.size() == 1 ? outputs.front() : ad::concat_rows(outputs);
}

ad::Var pose_latent(ad::Var h_text, ad::Var w_e) {
  if (h_text.cols() != w_e.cols()) throw DimensionError("pose_latent: H_T width does not match W_E");
  return ad::matmul_nt(h_text, w_e);
}

PoseLatentSequence pose_latent(const Tensor& h_text, const Tensor& w_e) {
  if (h_text.cols() != w_e.cols()) throw DimensionError("pose_latent: H_T width does not match W_E");
  return {matmul_nt(h_text, w_e)};
}

}  // namespace lblm::encoder
