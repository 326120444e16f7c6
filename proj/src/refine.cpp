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

#include "lblm/refine.hpp"

#include <cmath>
#include <vector>

#include "lblm/error.hpp"

namespace lblm::refine {
namespace {

void require_frames(std::size_t rows, const char* op) {
  if (rows == 0) throw ParameterError(std::string(op) + ": empty sequence");
}

}  // namespace

void validate(const RefinerConfig& cfg) {
  if (cfg.heads == 0) throw ConfigError("refine.heads must be >= 1");
  if (cfg.qk_dim == 0) throw ConfigError("refine.qk_dim must be >= 1");
  if (!(cfg.temperature > 0.0)) throw ConfigError("refine.temperature must be > 0");
}

std::size_t head_dim(std::size_t dim, std::size_t heads) {
  const std::size_t dh = heads ? dim / heads : 0;
  if (dh == 0) throw ConfigError("refine.heads exceeds pose width");
  return dh;
}

void init_refiner(ParamStore& store, const RefinerConfig& cfg, std::size_t dim, const Rng& master,
                  const std::string& prefix) {
  validate(cfg);
  const std::string p = prefix + ".";
  const std::size_t inner = cfg.heads * head_dim(dim, cfg.heads);
  const double s_in = 1.0 / std::sqrt(static_cast<double>(dim));
  init_normal(store, p + "mha.w_q", {inner, dim}, s_in, master);
  init_normal(store, p + "mha.w_k", {inner, dim}, s_in, master);
  init_normal(store, p + "mha.w_v", {inner, dim}, s_in, master);
  init_normal(store, p + "mha.w_o", {dim, inner}, 1.0 / std::sqrt(static_cast<double>(inner)), master);
  init_constant(store, p + "mha.b_o", {dim}, 0.0);
  init_normal(store, p + "weighted.w_q", {cfg.qk_dim, dim}, s_in, master);
  init_normal(store, p + "weighted.w_k", {cfg.qk_dim, dim}, s_in, master);
  init_constant(store, p + "weighted.log_beta", {1}, std::log(cfg.temperature));
}

MhaWeights<Tensor> load_mha(const ParamStore& store, const std::string& prefix) {
  const std::string p = prefix + ".mha.";
  return {store.get(p + "w_q"), store.get(p + "w_k"), store.get(p + "w_v"), store.get(p + "w_o"),
          store.get(p + "b_o")};
}

WeightedWeights<Tensor> load_weighted(const ParamStore& store, const std::string& prefix) {
  const std::string p = prefix + ".weighted.";
  return {store.get(p + "w_q"), store.get(p + "w_k"), store.get(p + "log_beta")};
}

MhaWeights<ad::Var> bind_mha(Binder& binder, const std::string& prefix) {
  const std::string p = prefix + ".mha.";
  return {binder(p + "w_q"), binder(p + "w_k"), binder(p + "w_v"), binder(p + "w_o"), binder(p + "b_o")};
}

WeightedWeights<ad::Var> bind_weighted(Binder& binder, const std::string& prefix) {
  const std::string p = prefix + ".weighted.";
  return {binder(p + "w_q"), binder(p + "w_k"), binder(p + "log_beta")};
}

double learned_beta(const WeightedWeights<Tensor>& w) { return std::exp(w.log_beta[0]); }

ad::Var refine_mha(ad::Var p, const MhaWeights<ad::Var>& w, std::size_t heads) {
  require_frames(p.rows(), "refine_mha");
  const std::size_t inner = w.w_q.rows();
  if (heads == 0 || inner % heads != 0) throw DimensionError("refine_mha: projection width not divisible by heads");
  const std::size_t dh = inner / heads;
  const ad::Var q = ad::matmul_nt(p, w.w_q);
  const ad::Var k = ad::matmul_nt(p, w.w_k);
  const ad::Var v = ad::matmul_nt(p, w.w_v);
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<ad::Var> outs;
  for (std::size_t h = 0; h < heads; ++h) {
    const ad::Var qh = ad::slice_cols(q, h * dh, (h + 1) * dh);
    const ad::Var kh = ad::slice_cols(k, h * dh, (h + 1) * dh);
    const ad::Var vh = ad::slice_cols(v, h * dh, (h + 1) * dh);
    const ad::Var a = ad::softmax_rows(ad::scale(ad::matmul_nt(qh, kh), inv_sqrt));
    outs.push_back(ad::matmul(a, vh));
  }
  const ad::Var cat = heads == 1 ? outs.front() : ad::concat_cols(outs);
  return ad::linear(cat, w.w_o, w.b_o);
}

ad::Var refine_weighted(ad::Var p, const WeightedWeights<ad::Var>& w) {
  require_frames(p.rows(), "refine_weighted");
  const ad::Var q = ad::matmul_nt(p, w.w_q);
  const ad::Var k = ad::matmul_nt(p, w.w_k);
  const ad::Var beta = ad::exp(w.log_beta);
  const ad::Var alpha = ad::softmax_rows(ad::mul_scalar(ad::matmul_nt(q, k), beta));
  return ad::matmul(alpha, p);
}

Tensor refine_mha(const Tensor& p, const MhaWeights<Tensor>& w, std::size_t heads) {
  require_frames(p.rows(), "refine_mha");
  ad::Graph g;
  const MhaWeights<ad::Var> wv{g.constant(w.w_q), g.constant(w.w_k), g.constant(w.w_v), g.constant(w.w_o),
                               g.constant(w.b_o)};
  return refine_mha(g.constant(p), wv, heads).value();
}

Tensor weighted_attention(const Tensor& p, const Tensor& w_q, const Tensor& w_k, double beta) {
  require_frames(p.rows(), "refine_weighted");
  if (!(beta > 0.0)) throw ParameterError("refine_weighted: temperature beta must be > 0");
  return softmax(matmul_nt(matmul_nt(p, w_q), matmul_nt(p, w_k)), beta);
}

Tensor refine_weighted(const Tensor& p, const Tensor& w_q, const Tensor& w_k, double beta) {
  return matmul(weighted_attention(p, w_q, w_k, beta), p);
}

}  // namespace lblm::refine
