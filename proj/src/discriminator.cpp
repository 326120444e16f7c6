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

#include "lblm/discriminator.hpp"

#include <algorithm>
#include <vector>
#include <cmath>

#include "lblm/error.hpp"

namespace lblm::disc {
namespace {

double clamp_logit(double l) {
  if (!std::isfinite(l)) throw NumericError("discriminator produced a non-finite logit");
  return std::clamp(l, -kLogitClamp, kLogitClamp);
}

// log(sigmoid(x)) without overflow.
double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

ad::Var mean_of(std::span<const ad::Var> parts) {
  ad::Var acc = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) acc = ad::add(acc, parts[i]);
  return ad::scale(acc, 1.0 / static_cast<double>(parts.size()));
}

}  // namespace

double Discriminator::probability(const Tensor& frames) const {
  return 1.0 / (1.0 + std::exp(-clamp_logit(logit(frames))));
}

void init_discriminator(ParamStore& store, std::size_t pose_dim, std::size_t hidden, const Rng& master,
                        const Tensor* shift, const Tensor* scale, const std::string& prefix) {
  if (hidden == 0) throw ConfigError("disc.hidden must be >= 1");
  const std::string p = prefix + ".";
  const double sh = 1.0 / std::sqrt(static_cast<double>(hidden));
  init_normal(store, p + "w_1", {hidden, 2 * pose_dim}, 1.0 / std::sqrt(static_cast<double>(2 * pose_dim)), master);
  init_constant(store, p + "b_1", {hidden}, 0.0);
  init_normal(store, p + "w_2", {hidden, hidden}, sh, master);
  init_constant(store, p + "b_2", {hidden}, 0.0);
  init_normal(store, p + "w_3", {1, hidden}, sh, master);
  init_constant(store, p + "b_3", {1}, 0.0);
  const std::string f = "fixed." + p;
  for (const Tensor* t : {shift, scale}) {
    if (t && t->size() != 2 * pose_dim) throw DimensionError("init_discriminator: standardisation width != 2D");
  }
  if (shift) {
    store.set(f + "shift", shift->reshaped({2 * pose_dim}));
  } else {
    init_constant(store, f + "shift", {2 * pose_dim}, 0.0);
  }
  if (scale) {
    store.set(f + "scale", scale->reshaped({2 * pose_dim}));
  } else {
    init_constant(store, f + "scale", {2 * pose_dim}, 1.0);
  }
}

MlpWeights<Tensor> load_discriminator(const ParamStore& store, const std::string& prefix) {
  const std::string p = prefix + ".";
  const std::string f = "fixed." + p;
  return {store.get(p + "w_1"), store.get(p + "b_1"), store.get(p + "w_2"),      store.get(p + "b_2"),
          store.get(p + "w_3"), store.get(p + "b_3"), store.get(f + "shift"), store.get(f + "scale")};
}

MlpWeights<ad::Var> bind_discriminator(Binder& binder, const std::string& prefix) {
  const std::string p = prefix + ".";
  const std::string f = "fixed." + p;
  return {binder(p + "w_1"), binder(p + "b_1"), binder(p + "w_2"),      binder(p + "b_2"),
          binder(p + "w_3"), binder(p + "b_3"), binder(f + "shift"), binder(f + "scale")};
}

Tensor velocity_matrix(std::size_t frames) {
  Tensor m({frames, frames});
  for (std::size_t t = 1; t < frames; ++t) {
    m.at(t, t) = 1.0;
    m.at(t, t - 1) = -1.0;
  }
  return m;
}

ad::Var logit(ad::Var frames, const MlpWeights<ad::Var>& w) {
  if (frames.rows() == 0) throw ParameterError("discriminator: empty sequence");
  if (2 * frames.cols() != w.w_1.cols()) throw DimensionError("discriminator: pose width mismatch");
  ad::Graph& g = frames.graph();
  const ad::Var vel = ad::matmul(g.constant(velocity_matrix(frames.rows())), frames);
  const ad::Var feats[] = {frames, vel};
  ad::Var x = ad::add_row(ad::concat_cols(feats), ad::scale(w.in_shift, -1.0));
  Tensor diag({x.cols(), x.cols()});
  const Tensor& s = w.in_scale.value();
  for (std::size_t i = 0; i < x.cols(); ++i) diag.at(i, i) = s[i];
  x = ad::matmul(x, g.constant(std::move(diag)));
  const ad::Var h = ad::tanh(ad::linear(x, w.w_1, w.b_1));
  const ad::Var z = ad::tanh(ad::linear(ad::mean_rows(h), w.w_2, w.b_2));
  // Saturating bound: finite log-terms without the dead gradient of a hard clamp.
  const ad::Var raw = ad::linear(z, w.w_3, w.b_3);
  return ad::scale(ad::tanh(ad::scale(raw, 1.0 / kLogitClamp)), kLogitClamp);
}

double MlpDiscriminator::logit(const Tensor& frames) const {
  ad::Graph g;
  const MlpWeights<ad::Var> w{g.constant(w_.w_1), g.constant(w_.b_1),     g.constant(w_.w_2),
                              g.constant(w_.b_2), g.constant(w_.w_3),     g.constant(w_.b_3),
                              g.constant(w_.in_shift), g.constant(w_.in_scale)};
  return disc::logit(g.constant(frames), w).value().item();
}

double generator_loss(std::span<const Tensor> fake, const Discriminator& d) {
  if (fake.empty()) throw ParameterError("generator_loss: empty batch");
  double acc = 0.0;
  for (const Tensor& f : fake) acc -= log_sigmoid(clamp_logit(d.logit(f)));
  return acc / static_cast<double>(fake.size());
}

double discriminator_loss(std::span<const Tensor> real, std::span<const Tensor> fake, const Discriminator& d) {
  if (real.empty() || fake.empty()) throw ParameterError("discriminator_loss: empty batch");
  double r = 0.0, f = 0.0;
  for (const Tensor& x : real) r -= log_sigmoid(clamp_logit(d.logit(x)));
  for (const Tensor& x : fake) f -= log_sigmoid(-clamp_logit(d.logit(x)));
  return r / static_cast<double>(real.size()) + f / static_cast<double>(fake.size());
}

ad::Var generator_loss(std::span<const ad::Var> fake_logits) {
  if (fake_logits.empty()) throw ParameterError("generator_loss: empty batch");
  std::vector<ad::Var> terms;
  for (const ad::Var& l : fake_logits) terms.push_back(ad::log_sigmoid(l));
  return ad::scale(mean_of(terms), -1.0);
}

ad::Var discriminator_loss(std::span<const ad::Var> real_logits, std::span<const ad::Var> fake_logits) {
  if (real_logits.empty() || fake_logits.empty()) throw ParameterError("discriminator_loss: empty batch");
  std::vector<ad::Var> real_terms, fake_terms;
  for (const ad::Var& l : real_logits) real_terms.push_back(ad::log_sigmoid(l));
  for (const ad::Var& l : fake_logits) fake_terms.push_back(ad::log_sigmoid(ad::scale(l, -1.0)));
  return ad::scale(ad::add(mean_of(real_terms), mean_of(fake_terms)), -1.0);
}

}  // namespace lblm::disc
