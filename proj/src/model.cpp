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

#include "lblm/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "lblm/error.hpp"

namespace lblm::model {
namespace {

// Floors for the discriminator's input standardisation (meters, meters/frame).
constexpr double kMinPoseStd = 0.05;
constexpr double kMinVelocityStd = 0.02;

constexpr const char* kGeneratorPrefixes[] = {"encoder.", "diffusion.", "decoder.", "refine.", "align."};

// Projected and concatenated modality rows as a graph value.
ad::Var project_inputs(Binder& b, const Conditioning& c) {
  std::vector<ad::Var> parts;
  auto add = [&](const encoder::FeatureTrack& t, const char* name, std::size_t want) {
    if (t.length() == 0) return;
    if (t.width() != want) {
      throw DimensionError(std::string(name) + " features have width " + std::to_string(t.width()) +
                           ", model expects " + std::to_string(want));
    }
    parts.push_back(ad::matmul_nt(b.graph().constant(t.data), b(std::string("encoder.proj.w_") + name)));
  };
  const ParamStore& s = b.store();
  add(c.text, "text", s.get("encoder.proj.w_text").cols());
  add(c.audio, "audio", s.get("encoder.proj.w_audio").cols());
  add(c.video, "video", s.get("encoder.proj.w_video").cols());
  if (parts.empty()) throw ParameterError("generate: every modality track is empty");
  return parts.size() == 1 ? parts.front() : ad::concat_rows(parts);
}

struct Encoded {
  ad::Var latent;  // L_T x d_p conditioning for the denoiser
  ad::Var source;  // rows the alignment attends from
};

Encoded encode(Binder& b, const Model& m, const Conditioning& c) {
  if (c.text.length() == 0) throw ParameterError("generate: the text track is required");
  const ModelConfig& cfg = m.config;
  const ad::Var x = project_inputs(b, c);
  const encoder::EncoderWeights<ad::Var> w = encoder::bind_encoder(b, cfg.encoder);
  const ad::Var h = encoder::encode_sequence(x, w, cfg.encoder);
  const ad::Var h_text = ad::slice_rows(h, 0, c.text.length());
  Encoded out;
  if (cfg.multimodal_embed) {
    out.latent = encoder::pose_latent(h_text, w.w_e);
  } else {
    out.latent = b.graph().constant(Tensor({c.text.length(), cfg.diffusion.latent_dim}));
  }
  const SourceSpan span = alignment_source(c);
  out.source = ad::slice_rows(h, span.begin, span.end);
  return out;
}

// Decoder, refinement and post-processing up to (not including) constraints.
ad::Var decode(Binder& b, const Model& m, ad::Var z, ad::Var source, bool postprocess) {
  const ModelConfig& cfg = m.config;
  ad::Var p = ad::linear(z, b("decoder.w_out"), b("decoder.b_out"));
  if (!postprocess) return p;
  if (cfg.refine.enable_mha) {
    const refine::MhaWeights<ad::Var> w = refine::bind_mha(b);
    p = ad::add(p, refine::refine_mha(p, w, cfg.refine.heads));
  }
  if (cfg.refine.enable_weighted) p = refine::refine_weighted(p, refine::bind_weighted(b));
  auto smooth = [&](ad::Var x) {
    if (!cfg.post.smoothing_enabled) return x;
    return ad::matmul(b.graph().constant(post::smoothing_matrix(x.rows(), cfg.post.smoothing)), x);
  };
  auto align = [&](ad::Var x) {
    if (!cfg.post.align_enabled) return x;
    return post::align(source, x, post::bind_alignment(b));
  };
  p = cfg.post.order == post::Order::kSmoothThenAlign ? align(smooth(p)) : smooth(align(p));
  if (cfg.post.constraints_enabled) p = pose::project_bone_lengths(p, m.layout);
  return p;
}

}  // namespace

void validate(const ModelConfig& cfg) {
  encoder::validate(cfg.encoder);
  refine::validate(cfg.refine);
  post::validate(cfg.post.smoothing);
  if (cfg.diffusion.n_chains == 0) throw ConfigError("diffusion.n_chains must be >= 1");
  if (cfg.diffusion.latent_dim != cfg.encoder.pose_latent_dim) {
    throw ConfigError("diffusion latent width must equal encoder.pose_latent_dim");
  }
  if (cfg.disc_hidden == 0) throw ConfigError("disc.hidden must be >= 1");
  if (cfg.text_dim == 0 || cfg.audio_dim == 0 || cfg.video_dim == 0) {
    throw ConfigError("modality feature widths must be >= 1");
  }
}

PoseStats pose_stats(std::span<const pose::PoseSequence> corpus) {
  if (corpus.empty()) throw ParameterError("pose_stats: empty corpus");
  const std::size_t d = corpus.front().layout.dim();
  PoseStats s{Tensor({d}), Tensor({d}), Tensor({d})};
  std::size_t n = 0;
  for (const auto& seq : corpus) {
    if (seq.frames.cols() != d) throw LayoutError("pose_stats: sequences use different layouts");
    for (std::size_t t = 0; t < seq.length(); ++t, ++n)
      for (std::size_t c = 0; c < d; ++c) s.mean[c] += seq.frames.at(t, c);
  }
  for (std::size_t c = 0; c < d; ++c) s.mean[c] /= static_cast<double>(n);
  for (const auto& seq : corpus)
    for (std::size_t t = 0; t < seq.length(); ++t)
      for (std::size_t c = 0; c < d; ++c) {
        const double dv = seq.frames.at(t, c) - s.mean[c];
        s.stddev[c] += dv * dv;
      }
  std::size_t nv = 0;
  for (const auto& seq : corpus)
    for (std::size_t t = 1; t < seq.length(); ++t, ++nv)
      for (std::size_t c = 0; c < d; ++c) {
        const double dv = seq.frames.at(t, c) - seq.frames.at(t - 1, c);
        s.velocity_stddev[c] += dv * dv;
      }
  for (std::size_t c = 0; c < d; ++c) {
    s.stddev[c] = std::sqrt(s.stddev[c] / static_cast<double>(std::max<std::size_t>(1, n - 1)));
    s.velocity_stddev[c] = std::sqrt(s.velocity_stddev[c] / static_cast<double>(std::max<std::size_t>(1, nv)));
  }
  return s;
}

Model init_model(const ModelConfig& cfg, const pose::BodyLayout& layout, const std::optional<PoseStats>& stats) {
  validate(cfg);
  pose::validate(layout);
  Model m{cfg, layout, {}};
  const Rng master(cfg.init_seed);
  const std::size_t dim = layout.dim();
  encoder::init_encoder(m.params, cfg.encoder, cfg.text_dim, cfg.audio_dim, cfg.video_dim, master);
  diffusion::init_diffusion(m.params, cfg.diffusion, master);
  refine::RefinerConfig rc = cfg.refine;
  refine::init_refiner(m.params, rc, dim, master);
  // The residual refiner starts close to the identity map.
  Tensor& w_o = m.params.get_mut("refine.mha.w_o");
  w_o = scale(w_o, 0.1);
  post::init_alignment(m.params, cfg.post.align_key_dim, cfg.encoder.d, dim, master);
  if (stats) {
    if (stats->mean.size() != dim || stats->stddev.size() != dim || stats->velocity_stddev.size() != dim) {
      throw LayoutError("init_model: pose statistics do not match the layout");
    }
    Tensor shift({2 * dim}), scale({2 * dim});
    for (std::size_t c = 0; c < dim; ++c) {
      shift[c] = stats->mean[c];
      scale[c] = 1.0 / std::max(stats->stddev[c], kMinPoseStd);
      scale[dim + c] = 1.0 / std::max(stats->velocity_stddev[c], kMinVelocityStd);
    }
    disc::init_discriminator(m.params, dim, cfg.disc_hidden, master, &shift, &scale);
  } else {
    disc::init_discriminator(m.params, dim, cfg.disc_hidden, master);
  }

  const std::size_t dp = cfg.diffusion.latent_dim;
  init_normal(m.params, "decoder.w_out", {dim, dp}, 1.0 / std::sqrt(static_cast<double>(dp)), master);
  init_constant(m.params, "decoder.b_out", {dim}, 0.0);
  if (stats) {
    Tensor& w = m.params.get_mut("decoder.w_out");
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c = 0; c < dp; ++c) w.at(r, c) *= stats->stddev[r];
    if (cfg.decoder_mean_init) m.params.set("decoder.b_out", stats->mean);
  }
  return m;
}

bool is_generator_param(const std::string& name) {
  return std::any_of(std::begin(kGeneratorPrefixes), std::end(kGeneratorPrefixes),
                     [&](const char* p) { return name.rfind(p, 0) == 0; });
}

bool is_discriminator_param(const std::string& name) { return name.rfind("disc.", 0) == 0; }

SourceSpan alignment_source(const Conditioning& c) {
  const std::size_t lt = c.text.length(), la = c.audio.length(), lv = c.video.length();
  if (la > 0) return {lt, lt + la, c.audio.frame_rate};
  if (lv > 0) return {lt + la, lt + la + lv, c.video.frame_rate};
  return {0, lt, c.text.frame_rate};
}

std::vector<Tensor> chain_noise(const Rng& rng, const ModelConfig& cfg, std::size_t text_rows) {
  return diffusion::init_chains(rng, cfg.diffusion.n_chains, text_rows, cfg.diffusion.latent_dim).chains;
}

std::vector<ad::Var> generator_forward(Binder& binder, const Model& m, const Conditioning& c,
                                       const std::vector<Tensor>& noise) {
  const Encoded enc = encode(binder, m, c);
  const diffusion::DenoiserWeights<ad::Var> dw = diffusion::bind_denoiser(binder);
  const ad::Var beta_raw = binder("diffusion.beta_raw");
  std::vector<ad::Var> out;
  out.reserve(noise.size());
  for (const Tensor& z0 : noise) {
    const ad::Var z = diffusion::sample_chain(binder.graph().constant(z0), enc.latent, beta_raw, dw);
    out.push_back(decode(binder, m, z, enc.source, true));
  }
  return out;
}

namespace {

std::vector<Tensor> run_inference(const Model& m, const Conditioning& c, const Rng& rng, std::size_t threads,
                                  bool postprocess) {
  ad::Graph g;
  Binder b(g, m.params);
  const Encoded enc = encode(b, m, c);
  const diffusion::ResidualMlpDenoiser f(diffusion::load_denoiser(m.params));
  const diffusion::NoiseSchedule sched = diffusion::load_schedule(m.params);
  const std::vector<Tensor> latents =
      diffusion::sample(rng, m.config.diffusion.n_chains, sched.size(), sched, f, enc.latent.value(), threads);
  std::vector<Tensor> out;
  for (const Tensor& z : latents) out.push_back(decode(b, m, g.constant(z), enc.source, postprocess).value());
  return out;
}

}  // namespace

std::vector<Tensor> generate_raw(const Model& m, const Conditioning& c, const Rng& rng, std::size_t threads) {
  return run_inference(m, c, rng, threads, true);
}

Generated generate(const Model& m, const Conditioning& c, const Rng& rng, const GenerateOptions& opts) {
  std::vector<Tensor> chains = run_inference(m, c, rng, opts.threads, opts.postprocess);
  Generated out;
  if (m.config.diffusion.select == diffusion::ChainSelect::kDiscriminatorArgmax) {
    const disc::MlpDiscriminator d(disc::load_discriminator(m.params));
    for (const Tensor& s : chains) out.chain_scores.push_back(d.probability(s));
    out.chain = static_cast<std::size_t>(std::max_element(out.chain_scores.begin(), out.chain_scores.end()) -
                                         out.chain_scores.begin());
  }
  const double fps = opts.postprocess && m.config.post.align_enabled ? alignment_source(c).frame_rate
                                                                     : c.text.frame_rate;
  out.sequence = pose::PoseSequence{m.layout, std::move(chains[out.chain]), fps > 0.0 ? fps : 15.0};
  if (opts.postprocess && m.config.post.constraints_enabled) out.sequence = post::finalize(out.sequence);
  return out;
}

pose::PoseEmbeddingMatrix metric_embedding(std::size_t pose_dim, std::uint64_t seed, std::size_t dim) {
  Rng rng(seed);
  return {scale(gaussian_sample(rng, {pose_dim, dim}), 1.0 / std::sqrt(static_cast<double>(pose_dim)))};
}

}  // namespace lblm::model
