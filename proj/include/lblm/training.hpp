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
#include <map>
#include <string>
#include <vector>

#include "lblm/corpus.hpp"
#include "lblm/model.hpp"
#include "lblm/params.hpp"

namespace lblm::training {

struct TrainConfig {
  std::size_t batch_size = 32;
  double lr = 1e-4;
  std::size_t epochs = 200;
  std::size_t disc_steps_per_gen_step = 1;
  std::uint64_t seed = 7;
  bool cosine = true;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // When false only the discriminator is updated.
  bool adversarial = true;
  // Discriminator updates against the initial generator before epoch 0.
  std::size_t disc_warmup_steps = 0;
  // Seed of the fixed metric embedding and of the evaluation noise.
  std::uint64_t metric_seed = 11;
  std::size_t threads = 1;
};

void validate(const TrainConfig& cfg);

// 0.5 lr (1 + cos(pi e / (E - 1))); constant lr when the schedule is off.
double cosine_lr(const TrainConfig& cfg, std::size_t epoch);

class AdamW {
 public:
  AdamW(double beta1, double beta2, double eps, double weight_decay)
      : beta1_(beta1), beta2_(beta2), eps_(eps), weight_decay_(weight_decay) {}
  // Updates every parameter named in `grads`; other entries are untouched.
  void step(ParamStore& params, const std::map<std::string, Tensor>& grads, double lr);
  std::size_t steps() const { return t_; }

 private:
  double beta1_, beta2_, eps_, weight_decay_;
  std::size_t t_ = 0;
  std::map<std::string, Tensor> m_, v_;
};

struct EpochStats {
  std::size_t epoch = 0;
  double l_g = 0.0;
  double l_d = 0.0;
  double grs = 0.0;
  double fgd = 0.0;
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  // Header: epoch,l_g,l_d,grs,fgd,seconds. The seconds column is left empty
  // unless `wallclock` so that reruns are byte-identical.
  std::string csv(bool wallclock = false) const;
  std::string timing_csv() const;
};

struct TrainResult {
  model::Model model;
  TrainReport report;
  std::size_t epochs_done = 0;
};

// Evaluation pass used for the per-epoch report: GRS of held-out generations
// under the current discriminator, and FGD between generations for every item
// of `heldout` and `reference` and those items' real poses.
struct Evaluation {
  double grs = 0.0;
  double fgd = 0.0;
};
Evaluation evaluate(const model::Model& m, const std::vector<corpus::Item>& heldout,
                    const std::vector<corpus::Item>& reference, std::uint64_t metric_seed, std::size_t threads = 1);

using EpochCallback = std::function<void(const EpochStats&, const model::Model&)>;

TrainResult train(model::Model init, const std::vector<corpus::Item>& corpus, const std::vector<corpus::Item>& heldout,
                  const TrainConfig& cfg, const EpochCallback& on_epoch = {});

}  // namespace lblm::training
