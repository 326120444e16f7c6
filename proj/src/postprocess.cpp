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

#include "lblm/postprocess.hpp"

#include <cmath>

#include "lblm/error.hpp"

namespace lblm::post {

SmoothingMode parse_smoothing_mode(const std::string& name) {
  if (name == "paper" || name == "paper_literal") return SmoothingMode::kPaperLiteral;
  if (name == "normalized" || name == "kernel_normalized") return SmoothingMode::kKernelNormalized;
  throw ConfigError("smoothing mode must be paper or normalized, got '" + name + "'");
}

std::string smoothing_mode_name(SmoothingMode m) {
  return m == SmoothingMode::kPaperLiteral ? "paper" : "normalized";
}

void validate(const SmoothingConfig& cfg) {
  if (cfg.filter_size == 0 || cfg.filter_size % 2 == 0) {
    throw ParameterError("smoothing filter size must be odd and >= 1, got " + std::to_string(cfg.filter_size));
  }
  if (!(cfg.sigma > 0.0) || !std::isfinite(cfg.sigma)) throw ParameterError("smoothing sigma must be > 0");
}

std::vector<double> smoothing_kernel(const SmoothingConfig& cfg) {
  validate(cfg);
  const long half = static_cast<long>(cfg.filter_size / 2);
  std::vector<double> w;
  double total = 0.0;
  for (long k = -half; k <= half; ++k) {
    const double x = static_cast<double>(k);
    w.push_back(std::exp(-x * x / (2.0 * cfg.sigma * cfg.sigma)));
    total += w.back();
  }
  const double norm = cfg.mode == SmoothingMode::kPaperLiteral ? static_cast<double>(cfg.filter_size) : total;
  for (double& v : w) v /= norm;
  return w;
}

Tensor smooth_frames(const Tensor& frames, const SmoothingConfig& cfg) {
  const std::size_t t_len = frames.rows();
  if (frames.empty() || t_len == 0) throw ParameterError("smooth: empty sequence");
  const std::vector<double> w = smoothing_kernel(cfg);
  const long half = static_cast<long>(cfg.filter_size / 2);
  const std::size_t d = frames.cols();
  const long n_vel = static_cast<long>(t_len) - 1;
  Tensor out = frames;
  std::vector<double> vel(static_cast<std::size_t>(std::max(0L, n_vel)) * d);
  for (long t = 0; t < n_vel; ++t)
    for (std::size_t c = 0; c < d; ++c) vel[t * d + c] = frames.at(t + 1, c) - frames.at(t, c);
  for (long t = 0; t < n_vel; ++t) {
    for (std::size_t c = 0; c < d; ++c) {
      double acc = 0.0;
      for (long k = -half; k <= half; ++k) {
        const long s = t + k;
        if (s >= 0 && s < n_vel) acc += w[k + half] * vel[s * d + c];
      }
      out.at(t + 1, c) = out.at(t, c) + acc;
    }
  }
  return out.check_finite("smooth");
}

pose::PoseSequence smooth(const pose::PoseSequence& g, const SmoothingConfig& cfg) {
  pose::PoseSequence out = g;
  out.frames = smooth_frames(g.frames, cfg);
  return out;
}

Tensor smoothing_matrix(std::size_t frames, const SmoothingConfig& cfg) {
  if (frames == 0) throw ParameterError("smooth: empty sequence");
  const std::vector<double> w = smoothing_kernel(cfg);
  const long half = static_cast<long>(cfg.filter_size / 2);
  const long n_vel = static_cast<long>(frames) - 1;
  // Filtered velocity t as a combination of frames: sum_k w_k (e_{s+1} - e_s).
  Tensor filtered({static_cast<std::size_t>(std::max(0L, n_vel)), frames});
  for (long t = 0; t < n_vel; ++t) {
    for (long k = -half; k <= half; ++k) {
      const long s = t + k;
      if (s < 0 || s >= n_vel) continue;
      filtered.at(t, s + 1) += w[k + half];
      filtered.at(t, s) -= w[k + half];
    }
  }
  Tensor m({frames, frames});
  m.at(0, 0) = 1.0;
  for (std::size_t t = 1; t < frames; ++t) {
    for (std::size_t c = 0; c < frames; ++c) m.at(t, c) = m.at(t - 1, c) + filtered.at(t - 1, c);
  }
  return m;
}

void init_alignment(ParamStore& store, std::size_t key_dim, std::size_t source_dim, std::size_t pose_dim,
                    const Rng& master, const std::string& prefix) {
  if (key_dim == 0) throw ConfigError("alignment key width must be >= 1");
  init_normal(store, prefix + ".w_q", {key_dim, source_dim}, 1.0 / std::sqrt(static_cast<double>(source_dim)),
              master);
  init_normal(store, prefix + ".w_k", {key_dim, pose_dim}, 1.0 / std::sqrt(static_cast<double>(pose_dim)), master);
}

AlignmentParams<Tensor> load_alignment(const ParamStore& store, const std::string& prefix) {
  return {store.get(prefix + ".w_q"), store.get(prefix + ".w_k")};
}

AlignmentParams<ad::Var> bind_alignment(Binder& binder, const std::string& prefix) {
  return {binder(prefix + ".w_q"), binder(prefix + ".w_k")};
}

Tensor alignment_weights(const Tensor& s, const Tensor& g, const AlignmentParams<Tensor>& p) {
  if (s.empty() || g.empty()) throw ParameterError("align: empty inputs");
  if (s.cols() != p.w_q.cols() || g.cols() != p.w_k.cols() || p.w_q.rows() != p.w_k.rows()) {
    throw DimensionError("align: projection shapes do not match inputs");
  }
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(p.w_q.rows()));
  return softmax(scale(matmul_nt(matmul_nt(s, p.w_q), matmul_nt(g, p.w_k)), inv_sqrt));
}

Tensor align_frames(const Tensor& s, const Tensor& g, const AlignmentParams<Tensor>& p) {
  return matmul(alignment_weights(s, g, p), g);
}

pose::PoseSequence align(const Tensor& s, const pose::PoseSequence& g, const AlignmentParams<Tensor>& p) {
  pose::PoseSequence out = g;
  out.frames = align_frames(s, g.frames, p);
  return out;
}

ad::Var align(ad::Var s, ad::Var g, const AlignmentParams<ad::Var>& p) {
  if (s.rows() == 0 || g.rows() == 0) throw ParameterError("align: empty inputs");
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(p.w_q.rows()));
  const ad::Var scores = ad::scale(ad::matmul_nt(ad::matmul_nt(s, p.w_q), ad::matmul_nt(g, p.w_k)), inv_sqrt);
  return ad::matmul(ad::softmax_rows(scores), g);
}

pose::PoseSequence finalize(const pose::PoseSequence& g) {
  pose::validate(g);
  pose::PoseSequence out = g;
  for (std::size_t t = 0; t < g.length(); ++t) out.set_frame(t, pose::enforce_constraints(g.frame(t), g.layout));
  return out;
}

Order parse_order(const std::string& name) {
  if (name == "smooth_align") return Order::kSmoothThenAlign;
  if (name == "align_smooth") return Order::kAlignThenSmooth;
  throw ConfigError("post.order must be smooth_align or align_smooth, got '" + name + "'");
}

std::string order_name(Order o) { return o == Order::kSmoothThenAlign ? "smooth_align" : "align_smooth"; }

}  // namespace lblm::post
