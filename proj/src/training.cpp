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

#include "lblm/training.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "lblm/discriminator.hpp"
#include "lblm/error.hpp"
#include "lblm/metrics.hpp"

namespace lblm::training {
namespace {

using Items = std::vector<corpus::Item>;

struct StepLosses {
  double l_g = 0.0;
  double l_d = 0.0;
};

enum class Phase { kDiscriminator, kGenerator };

const char* phase_name(Phase p) { return p == Phase::kDiscriminator ? "discriminator" : "generator"; }

// One optimisation step on `batch`. Fakes are all N chains of every item.
StepLosses run_step(model::Model& m, AdamW& opt, const Items& corpus, const std::vector<std::size_t>& batch,
                    Phase phase, const Rng& noise_rng, double lr, bool update) {
  ad::Graph g;
  Binder binder(g, m.params,
                phase == Phase::kDiscriminator ? Binder::Predicate(model::is_discriminator_param)
                                               : Binder::Predicate(model::is_generator_param));
  const disc::MlpWeights<ad::Var> dw = disc::bind_discriminator(binder);
  std::vector<ad::Var> fake_logits, real_logits;
  for (std::size_t idx : batch) {
    const corpus::Item& item = corpus[idx];
    const std::vector<Tensor> noise =
        model::chain_noise(noise_rng.split(idx), m.config, item.features.text.length());
    for (const ad::Var& fake : model::generator_forward(binder, m, item.features, noise)) {
      fake_logits.push_back(disc::logit(fake, dw));
    }
    if (phase == Phase::kDiscriminator) real_logits.push_back(disc::logit(g.constant(item.pose.frames), dw));
  }
  StepLosses out;
  const ad::Var l_g = disc::generator_loss(fake_logits);
  out.l_g = l_g.value().item();
  ad::Var loss = l_g;
  if (phase == Phase::kDiscriminator) {
    loss = disc::discriminator_loss(real_logits, fake_logits);
    out.l_d = loss.value().item();
  }
  if (!update) return out;
  g.backward(loss);
  const std::map<std::string, Tensor> grads = binder.gradients();
  for (const auto& [name, grad] : grads) {
    if (!grad.all_finite()) throw NumericError("non-finite gradient in parameter block '" + name + "'");
  }
  opt.step(m.params, grads, lr);
  for (const auto& [name, grad] : grads) {
    if (!m.params.get(name).all_finite()) throw NumericError("parameter block '" + name + "' became non-finite");
  }
  return out;
}

std::vector<std::vector<std::size_t>> batches(std::size_t n, std::size_t batch_size) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t b = 0; b < n; b += batch_size) {
    std::vector<std::size_t> idx;
    for (std::size_t i = b; i < std::min(n, b + batch_size); ++i) idx.push_back(i);
    out.push_back(std::move(idx));
  }
  return out;
}

template <typename F>
auto guarded(std::size_t epoch, std::size_t step, Phase phase, F&& f) {
  try {
    return f();
  } catch (const NumericError& e) {
    throw NumericError(fmt::format("training aborted at epoch {} step {} ({} update): {}", epoch, step,
                                   phase_name(phase), e.what()));
  }
}

}  // namespace

void validate(const TrainConfig& cfg) {
  if (cfg.batch_size == 0) throw ConfigError("train.batch_size must be >= 1");
  if (cfg.disc_steps_per_gen_step == 0) throw ConfigError("train.disc_steps_per_gen_step must be >= 1");
  if (!(cfg.lr > 0.0) || !std::isfinite(cfg.lr)) throw ConfigError("train.lr must be > 0");
  if (cfg.weight_decay < 0.0) throw ConfigError("train.weight_decay must be >= 0");
}

double cosine_lr(const TrainConfig& cfg, std::size_t epoch) {
  if (!cfg.cosine || cfg.epochs <= 1) return cfg.lr;
  const double x = static_cast<double>(std::min(epoch, cfg.epochs - 1)) / static_cast<double>(cfg.epochs - 1);
  return 0.5 * cfg.lr * (1.0 + std::cos(std::numbers::pi * x));
}

void AdamW::step(ParamStore& params, const std::map<std::string, Tensor>& grads, double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (const auto& [name, grad] : grads) {
    Tensor& p = params.get_mut(name);
    if (grad.size() != p.size()) throw DimensionError("AdamW: gradient shape differs for " + name);
    auto [mit, fresh_m] = m_.try_emplace(name, Tensor(p.shape()));
    auto [vit, fresh_v] = v_.try_emplace(name, Tensor(p.shape()));
    Tensor& m = mit->second;
    Tensor& v = vit->second;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * grad[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * grad[i] * grad[i];
      const double mh = m[i] / c1;
      const double vh = v[i] / c2;
      p[i] -= lr * (mh / (std::sqrt(vh) + eps_) + weight_decay_ * p[i]);
    }
  }
}

std::string TrainReport::csv(bool wallclock) const {
  std::ostringstream os;
  os << "epoch,l_g,l_d,grs,fgd,seconds\n";
  for (const EpochStats& e : epochs) {
    os << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},", e.epoch, e.l_g, e.l_d, e.grs, e.fgd);
    if (wallclock) os << fmt::format("{:.3f}", e.seconds);
    os << "\n";
  }
  return os.str();
}

std::string TrainReport::timing_csv() const {
  std::ostringstream os;
  os << "epoch,seconds\n";
  for (const EpochStats& e : epochs) os << fmt::format("{},{:.3f}\n", e.epoch, e.seconds);
  return os.str();
}

Evaluation evaluate(const model::Model& m, const Items& heldout, const Items& reference, std::uint64_t metric_seed,
                    std::size_t threads) {
  const Rng rng(metric_seed);
  const disc::MlpDiscriminator d(disc::load_discriminator(m.params));
  model::GenerateOptions opts;
  opts.threads = threads;
  Evaluation ev;
  std::vector<Tensor> gen, real;
  std::vector<Tensor> held_gen;
  for (std::size_t i = 0; i < heldout.size(); ++i) {
    held_gen.push_back(model::generate(m, heldout[i].features, rng.split(i), opts).sequence.frames);
    gen.push_back(held_gen.back());
    real.push_back(heldout[i].pose.frames);
  }
  for (std::size_t i = 0; i < reference.size(); ++i) {
    gen.push_back(model::generate(m, reference[i].features, rng.split(heldout.size() + i), opts).sequence.frames);
    real.push_back(reference[i].pose.frames);
  }
  if (!held_gen.empty()) ev.grs = metrics::grs(held_gen, &d);
  if (!gen.empty()) {
    const pose::PoseEmbeddingMatrix embed = model::metric_embedding(m.layout.dim(), metric_seed);
    ev.fgd = metrics::fgd(real, gen, embed);
  }
  return ev;
}

TrainResult train(model::Model init, const Items& corpus, const Items& heldout, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  validate(cfg);
  if (corpus.empty()) throw ParameterError("train: empty corpus");
  for (const corpus::Item& item : corpus) {
    if (item.pose.layout.dim() != init.layout.dim() || item.pose.frames.cols() != init.layout.dim()) {
      throw LayoutError("train: sequence " + item.id + " does not match the model layout");
    }
  }
  TrainResult result{std::move(init), {}, 0};
  model::Model& m = result.model;
  AdamW opt_d(cfg.beta1, cfg.beta2, cfg.eps, cfg.weight_decay);
  AdamW opt_g(cfg.beta1, cfg.beta2, cfg.eps, cfg.weight_decay);
  const Rng master(cfg.seed);
  const std::vector<std::vector<std::size_t>> groups = batches(corpus.size(), cfg.batch_size);
  const Items& eval_items = heldout.empty() ? corpus : heldout;
  const Items no_items;
  std::size_t step = 0;

  if (cfg.epochs > 0) {
    for (std::size_t w = 0; w < cfg.disc_warmup_steps; ++w, ++step) {
      guarded(0, step, Phase::kDiscriminator, [&] {
        return run_step(m, opt_d, corpus, groups[w % groups.size()], Phase::kDiscriminator, master.split(step),
                        cfg.lr, true);
      });
    }
  }

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const double lr = cosine_lr(cfg, epoch);
    double sum_g = 0.0, sum_d = 0.0;
    for (const auto& batch : groups) {
      StepLosses last;
      for (std::size_t s = 0; s < cfg.disc_steps_per_gen_step; ++s, ++step) {
        last = guarded(epoch, step, Phase::kDiscriminator, [&] {
          return run_step(m, opt_d, corpus, batch, Phase::kDiscriminator, master.split(step), lr, true);
        });
      }
      sum_d += last.l_d;
      double l_g = last.l_g;
      if (cfg.adversarial) {
        l_g = guarded(epoch, step, Phase::kGenerator, [&] {
                return run_step(m, opt_g, corpus, batch, Phase::kGenerator, master.split(step), lr, true);
              }).l_g;
        ++step;
      }
      sum_g += l_g;
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.l_g = sum_g / static_cast<double>(groups.size());
    stats.l_d = sum_d / static_cast<double>(groups.size());
    const Evaluation ev = evaluate(m, eval_items, heldout.empty() ? no_items : corpus, cfg.metric_seed, cfg.threads);
    stats.grs = ev.grs;
    stats.fgd = ev.fgd;
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!std::isfinite(stats.l_g) || !std::isfinite(stats.l_d)) {
      throw NumericError(fmt::format("training aborted at epoch {}: non-finite loss", epoch));
    }
    result.report.epochs.push_back(stats);
    result.epochs_done = epoch + 1;
    if (on_epoch) on_epoch(stats, m);
  }
  return result;
}

}  // namespace lblm::training
