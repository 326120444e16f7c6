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

#include "lblm/diffusion.hpp"

#include <cmath>

#include "lblm/error.hpp"
#include "lblm/parallel.hpp"
#include "lblm/simd/kernels.hpp"

namespace lblm::diffusion {

ChainSelect parse_chain_select(const std::string& name) {
  if (name == "first") return ChainSelect::kFirst;
  if (name == "discriminator_argmax") return ChainSelect::kDiscriminatorArgmax;
  throw ConfigError("diffusion.select must be first or discriminator_argmax, got '" + name + "'");
}

std::string chain_select_name(ChainSelect s) {
  return s == ChainSelect::kFirst ? "first" : "discriminator_argmax";
}

NoiseSchedule NoiseSchedule::from_raw(const Tensor& raw) {
  NoiseSchedule s;
  s.betas.reserve(raw.size());
  for (double r : raw.values()) s.betas.push_back(2.0 / (1.0 + std::exp(-r)));
  return s;
}

void validate(const NoiseSchedule& sched) {
  for (std::size_t k = 0; k < sched.betas.size(); ++k) {
    const double b = sched.betas[k];
    if (!(b >= 0.0 && b < 2.0)) {
      throw ParameterError("noise schedule beta_" + std::to_string(k + 1) + " = " + std::to_string(b) +
                           " outside [0, 2)");
    }
  }
}

double beta_to_raw(double beta) {
  if (!(beta > 0.0 && beta < 2.0)) throw ParameterError("beta_to_raw: beta must be in (0, 2)");
  const double s = beta / 2.0;
  return std::log(s / (1.0 - s));
}

Tensor step_embedding(std::size_t k, std::size_t dim) {
  Tensor e({1, dim});
  const double kk = static_cast<double>(k);
  for (std::size_t i = 0; i < dim; ++i) {
    const double freq = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(dim));
    e[i] = (i % 2 == 0) ? std::sin(kk * freq) : std::cos(kk * freq);
  }
  return e;
}

ad::Var denoise(ad::Var z, ad::Var e, std::size_t k, const DenoiserWeights<ad::Var>& w) {
  if (z.rows() != e.rows() || z.cols() != e.cols()) throw DimensionError("denoise: z and E shapes differ");
  ad::Graph& g = z.graph();
  ad::Var r = ad::add(ad::matmul_nt(z, w.w_in), e);
  r = ad::add_row(r, g.constant(step_embedding(k, z.cols())));
  const ad::Var h = ad::gelu(ad::linear(r, w.w_1, w.b_1));
  return ad::add(r, ad::linear(h, w.w_2, w.b_2));
}

ad::Var sample_chain(ad::Var z0, ad::Var e, ad::Var beta_raw, const DenoiserWeights<ad::Var>& w) {
  ad::Var z = z0;
  const std::size_t k_steps = beta_raw.value().size();
  for (std::size_t k = 1; k <= k_steps; ++k) {
    const ad::Var half_beta = ad::sigmoid(ad::element(beta_raw, k - 1));  // beta / 2
    const ad::Var f = denoise(z, e, k, w);
    z = ad::add(z, ad::mul_scalar(ad::sub(f, z), half_beta));
  }
  return z;
}

Tensor ResidualMlpDenoiser::operator()(const Tensor& z, const Tensor& e, std::size_t k) const {
  ad::Graph g;
  const DenoiserWeights<ad::Var> w{g.constant(w_.w_in), g.constant(w_.w_1), g.constant(w_.b_1),
                                   g.constant(w_.w_2), g.constant(w_.b_2)};
  return denoise(g.constant(z), g.constant(e), k, w).value();
}

DiffusionBatch init_chains(const Rng& master, std::size_t n, std::size_t rows, std::size_t cols) {
  if (n == 0) throw ParameterError("init_chains: need at least one chain");
  DiffusionBatch batch;
  batch.chains.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng child = master.split(i);
    batch.chain_seeds.push_back(child.key());
    batch.chains.push_back(gaussian_sample(child, {rows, cols}));
  }
  return batch;
}

Tensor step_chain(const Tensor& z, double beta, const Denoiser& f, const Tensor& e, std::size_t k) {
  Tensor target = f(z, e, k);
  if (target.shape() != z.shape()) throw DimensionError("denoiser output shape differs from its input");
  target.check_finite("denoiser");
  Tensor out = z;
  simd::lerp(z.data(), target.data(), beta / 2.0, out.data(), z.size());
  out.check_finite("diffusion_step");
  return out;
}

DiffusionBatch diffusion_step(const DiffusionBatch& batch, const NoiseSchedule& sched, const Denoiser& f,
                              const Tensor& e, std::size_t threads) {
  if (batch.step >= sched.size()) {
    throw ScheduleExhausted("diffusion_step: step " + std::to_string(batch.step) + " but schedule has " +
                            std::to_string(sched.size()) + " steps");
  }
  validate(sched);
  DiffusionBatch out = batch;
  const double beta = sched.betas[batch.step];
  const std::size_t k = batch.step + 1;
  parallel_for(batch.chains.size(), threads,
               [&](std::size_t i) { out.chains[i] = step_chain(batch.chains[i], beta, f, e, k); });
  out.step = k;
  return out;
}

std::vector<Tensor> sample(const Rng& master, std::size_t n, std::size_t k_steps, const NoiseSchedule& sched,
                           const Denoiser& f, const Tensor& e, std::size_t threads) {
  if (sched.size() != k_steps) {
    throw ParameterError("sample: schedule has " + std::to_string(sched.size()) + " steps, expected " +
                         std::to_string(k_steps));
  }
  validate(sched);
  DiffusionBatch batch = init_chains(master, n, e.rows(), e.cols());
  parallel_for(n, threads, [&](std::size_t i) {
    Tensor z = std::move(batch.chains[i]);
    for (std::size_t k = 1; k <= k_steps; ++k) z = step_chain(z, sched.betas[k - 1], f, e, k);
    batch.chains[i] = std::move(z);
  });
  return std::move(batch.chains);
}

void init_diffusion(ParamStore& store, const DiffusionConfig& cfg, const Rng& master, const std::string& prefix) {
  if (cfg.latent_dim == 0 || cfg.hidden == 0) throw ConfigError("diffusion sizes must be >= 1");
  const std::string p = prefix + ".";
  const double din = static_cast<double>(cfg.latent_dim);
  // Small input map so that early on f stays close to E plus the step code.
  init_normal(store, p + "w_in", {cfg.latent_dim, cfg.latent_dim}, 0.5 / std::sqrt(din), master);
  init_normal(store, p + "w_1", {cfg.hidden, cfg.latent_dim}, 1.0 / std::sqrt(din), master);
  init_constant(store, p + "b_1", {cfg.hidden}, 0.0);
  init_normal(store, p + "w_2", {cfg.latent_dim, cfg.hidden}, 0.5 / std::sqrt(static_cast<double>(cfg.hidden)),
              master);
  init_constant(store, p + "b_2", {cfg.latent_dim}, 0.0);
  init_constant(store, p + "beta_raw", {cfg.k_steps}, cfg.k_steps ? beta_to_raw(cfg.beta_init) : 0.0);
}

DenoiserWeights<Tensor> load_denoiser(const ParamStore& store, const std::string& prefix) {
  const std::string p = prefix + ".";
  return {store.get(p + "w_in"), store.get(p + "w_1"), store.get(p + "b_1"), store.get(p + "w_2"),
          store.get(p + "b_2")};
}

NoiseSchedule load_schedule(const ParamStore& store, const std::string& prefix) {
  return NoiseSchedule::from_raw(store.get(prefix + ".beta_raw"));
}

DenoiserWeights<ad::Var> bind_denoiser(Binder& binder, const std::string& prefix) {
  const std::string p = prefix + ".";
  return {binder(p + "w_in"), binder(p + "w_1"), binder(p + "b_1"), binder(p + "w_2"), binder(p + "b_2")};
}

}  // namespace lblm::diffusion
