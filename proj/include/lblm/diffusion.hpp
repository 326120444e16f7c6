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
#include <functional>
#include <string>
#include <vector>

#include "lblm/autodiff.hpp"
#include "lblm/params.hpp"
#include "lblm/rng.hpp"
#include "lblm/tensor.hpp"

namespace lblm::diffusion {

enum class ChainSelect { kFirst, kDiscriminatorArgmax };

ChainSelect parse_chain_select(const std::string& name);
std::string chain_select_name(ChainSelect s);

struct DiffusionConfig {
  std::size_t n_chains = 4;
  std::size_t k_steps = 16;
  std::size_t latent_dim = 32;
  std::size_t hidden = 64;
  std::uint64_t seed = 7;
  ChainSelect select = ChainSelect::kFirst;
  // Initial step size for every k; stored through the squashing inverse.
  double beta_init = 0.25;
};

// Step sizes beta_k for k = 1..K (stored 0-based). The update is a convex
// move toward the denoiser target when beta_k < 2.
struct NoiseSchedule {
  std::vector<double> betas;

  std::size_t size() const { return betas.size(); }
  // Learned parameterisation beta = 2 * sigmoid(raw).
  static NoiseSchedule from_raw(const Tensor& raw);
};

void validate(const NoiseSchedule& sched);
// Inverse of the squashing map, for initialisation.
double beta_to_raw(double beta);

class Denoiser {
 public:
  virtual ~Denoiser() = default;
  // z, e: L x d_p. k is the 1-based step index.
  virtual Tensor operator()(const Tensor& z, const Tensor& e, std::size_t k) const = 0;
};

class FunctionDenoiser final : public Denoiser {
 public:
  using Fn = std::function<Tensor(const Tensor&, const Tensor&, std::size_t)>;
  explicit FunctionDenoiser(Fn fn) : fn_(std::move(fn)) {}
  Tensor operator()(const Tensor& z, const Tensor& e, std::size_t k) const override { return fn_(z, e, k); }

 private:
  Fn fn_;
};

template <typename T>
struct DenoiserWeights {
  T w_in;  // d_p x d_p
  T w_1;   // hidden x d_p
  T b_1;
  T w_2;  // d_p x hidden
  T b_2;
};

// Sinusoidal embedding of the step index, length `dim`.
Tensor step_embedding(std::size_t k, std::size_t dim);

// r = z W_inᵀ + e + emb(k);  f = r + W_2 gelu(W_1 r + b_1) + b_2.
class ResidualMlpDenoiser final : public Denoiser {
 public:
  explicit ResidualMlpDenoiser(DenoiserWeights<Tensor> w) : w_(std::move(w)) {}
  Tensor operator()(const Tensor& z, const Tensor& e, std::size_t k) const override;

 private:
  DenoiserWeights<Tensor> w_;
};

struct DiffusionBatch {
  std::vector<Tensor> chains;
  std::vector<std::uint64_t> chain_seeds;
  std::size_t step = 0;
};

DiffusionBatch init_chains(const Rng& master, std::size_t n, std::size_t rows, std::size_t cols);

// One update z <- z + (beta_k / 2)(f(z, e, k) - z) on every chain.
DiffusionBatch diffusion_step(const DiffusionBatch& batch, const NoiseSchedule& sched, const Denoiser& f,
                              const Tensor& e, std::size_t threads = 1);

// Single-chain update; exposed for replay checks.
Tensor step_chain(const Tensor& z, double beta, const Denoiser& f, const Tensor& e, std::size_t k);

// K = sched.size() steps from init_chains(master, n, ...). Each chain is run to
// completion on one worker, so the thread count never changes the result.
std::vector<Tensor> sample(const Rng& master, std::size_t n, std::size_t k_steps, const NoiseSchedule& sched,
                           const Denoiser& f, const Tensor& e, std::size_t threads = 1);

void init_diffusion(ParamStore& store, const DiffusionConfig& cfg, const Rng& master,
                    const std::string& prefix = "diffusion");
DenoiserWeights<Tensor> load_denoiser(const ParamStore& store, const std::string& prefix = "diffusion");
NoiseSchedule load_schedule(const ParamStore& store, const std::string& prefix = "diffusion");
DenoiserWeights<ad::Var> bind_denoiser(Binder& binder, const std::string& prefix = "diffusion");

// Differentiable counterparts used during training.
ad::Var denoise(ad::Var z, ad::Var e, std::size_t k, const DenoiserWeights<ad::Var>& w);
// Runs all K steps of one chain; beta_raw is the 1 x K raw schedule.
ad::Var sample_chain(ad::Var z0, ad::Var e, ad::Var beta_raw, const DenoiserWeights<ad::Var>& w);

}  // namespace lblm::diffusion
