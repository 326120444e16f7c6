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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "lblm/checkpoint.hpp"
#include "lblm/config.hpp"
#include "lblm/corpus.hpp"
#include "lblm/error.hpp"
#include "lblm/model.hpp"
#include "lblm/pose_io.hpp"
#include "lblm/tensor_io.hpp"
#include "lblm/training.hpp"

using namespace lblm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lblm_unit_" + name);
  fs::remove_all(p);
  return p;
}

model::ModelConfig tiny_model() {
  model::ModelConfig c;
  c.encoder.d = 16;
  c.encoder.heads = 2;
  c.encoder.layers = 1;
  c.encoder.segment_len = 8;
  c.encoder.pose_latent_dim = 8;
  c.encoder.ffn_hidden = 16;
  c.diffusion.latent_dim = 8;
  c.diffusion.hidden = 12;
  c.diffusion.k_steps = 3;
  c.diffusion.n_chains = 2;
  c.disc_hidden = 8;
  return c;
}

corpus::SynthConfig tiny_synth() {
  corpus::SynthConfig s;
  s.n_sequences = 2;
  s.n_heldout = 1;
  s.frames = 12;
  s.text_len = 6;
  s.audio_len = 12;
  s.video_len = 6;
  return s;
}

}  // namespace

TEST_CASE("config parsing reports line numbers and unknown keys") {
  const auto rc = config::RunConfig::parse("# comment\nseed = 3\ntrain.lr=0.5\n", "x.cfg");
  CHECK(rc.get_u64("seed", 0) == 3);
  CHECK(rc.get_double("train.lr", 0) == 0.5);
  try {
    config::RunConfig::parse("seed = 1\nbogus.key = 2\n", "x.cfg");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("x.cfg:2") != std::string::npos);
    CHECK(msg.find("bogus.key") != std::string::npos);
  }
  CHECK_THROWS_AS(config::RunConfig::parse("no equals sign\n"), ConfigError);
}

TEST_CASE("missing required keys are listed by name") {
  const auto rc = config::RunConfig::parse("seed = 1\n");
  try {
    rc.require({"corpus_dir", "seed", "out_dir"});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("corpus_dir") != std::string::npos);
    CHECK(msg.find("out_dir") != std::string::npos);
  }
}

TEST_CASE("typed getters reject malformed values") {
  auto rc = config::RunConfig::parse("threads = many\npost.align = maybe\n");
  CHECK_THROWS_AS(rc.get_size("threads", 1), ConfigError);
  CHECK_THROWS_AS(rc.get_bool("post.align", true), ConfigError);
  rc.set("post.align", "off");
  CHECK(!rc.get_bool("post.align", true));
}

TEST_CASE("seed precedence") {
  auto rc = config::RunConfig::parse("seed = 5\n");
  CHECK(rc.master_seed() == 5);
  rc.override_seed(9);
  CHECK(rc.master_seed() == 9);
}

TEST_CASE("model config round-trips through entries") {
  model::ModelConfig mc = tiny_model();
  mc.post.smoothing.mode = post::SmoothingMode::kPaperLiteral;
  mc.refine.enable_mha = false;
  config::RunConfig rc;
  for (const auto& [k, v] : config::model_entries(mc)) rc.set(k, v);
  CHECK(config::model_entries(config::model_config(rc)) == config::model_entries(mc));
}

TEST_CASE("cosine schedule") {
  training::TrainConfig c;
  c.lr = 1.0;
  c.epochs = 5;
  CHECK(training::cosine_lr(c, 0) == doctest::Approx(1.0));
  CHECK(training::cosine_lr(c, 2) == doctest::Approx(0.5));
  CHECK(std::abs(training::cosine_lr(c, 4)) < 1e-15);
  c.cosine = false;
  CHECK(training::cosine_lr(c, 4) == 1.0);
}

TEST_CASE("adamw first step moves by lr against the gradient sign") {
  ParamStore s;
  s.set("w", Tensor::vector({1.0, -2.0}));
  training::AdamW opt(0.9, 0.999, 1e-8, 0.0);
  opt.step(s, {{"w", Tensor::vector({0.5, -3.0})}}, 0.1);
  CHECK(s.get("w")[0] == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(s.get("w")[1] == doctest::Approx(-1.9).epsilon(1e-6));
  training::AdamW wd(0.9, 0.999, 1e-8, 0.5);
  ParamStore t;
  t.set("w", Tensor::vector({2.0}));
  wd.step(t, {{"w", Tensor::vector({0.0})}}, 0.1);
  CHECK(t.get("w")[0] == doctest::Approx(2.0 - 0.1 * 0.5 * 2.0));
}

TEST_CASE("synthetic corpus is deterministic and conforming") {
  const corpus::Corpus a = corpus::synthesize(tiny_synth()), b = corpus::synthesize(tiny_synth());
  REQUIRE(a.train.size() == 2);
  REQUIRE(a.heldout.size() == 1);
  CHECK(a.train[0].pose.frames == b.train[0].pose.frames);
  CHECK(a.train[0].features.audio.data == b.train[0].features.audio.data);
  for (const auto& item : a.train)
    for (std::size_t t = 0; t < item.pose.length(); ++t)
      CHECK(pose::check_constraints(item.pose.frame(t), item.pose.layout).ok());
  corpus::SynthConfig empty = tiny_synth();
  empty.n_sequences = 0;
  empty.n_heldout = 0;
  CHECK(corpus::synthesize(empty).train.empty());
}

TEST_CASE("corpus files round-trip") {
  const fs::path dir = scratch("corpus");
  const corpus::Corpus c = corpus::synthesize(tiny_synth());
  const nlohmann::json m = corpus::write_corpus(dir, c, corpus::to_json(tiny_synth()));
  CHECK(m["format"] == "lblm-corpus");
  const auto back = corpus::read_split(dir, "train");
  REQUIRE(back.size() == 2);
  CHECK(back[0].id == c.train[0].id);
  CHECK(back[0].pose.frames == c.train[0].pose.frames);
  CHECK(back[0].features.text.data == c.train[0].features.text.data);
  CHECK(back[0].features.audio.frame_rate == c.train[0].features.audio.frame_rate);
  // write -> read -> write is byte-stable
  const fs::path dir2 = scratch("corpus2");
  corpus::Corpus again{back, corpus::read_split(dir, "heldout")};
  for (auto& item : again.train) item.family = c.train[&item - again.train.data()].family;
  for (auto& item : again.heldout) item.family = c.heldout[&item - again.heldout.data()].family;
  const nlohmann::json m2 = corpus::write_corpus(dir2, again, corpus::to_json(tiny_synth()));
  CHECK(m2 == m);
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST_CASE("generation is deterministic and conforms to the layout") {
  const corpus::Corpus c = corpus::synthesize(tiny_synth());
  const auto stats = model::pose_stats(corpus::poses(c.train));
  const model::Model m = model::init_model(tiny_model(), pose::default_layout(), stats);
  const model::Generated a = model::generate(m, c.heldout[0].features, Rng(3));
  const model::Generated b = model::generate(m, c.heldout[0].features, Rng(3), {true, 3});
  CHECK(a.sequence.frames == b.sequence.frames);
  CHECK(a.sequence.length() == c.heldout[0].features.audio.length());
  for (std::size_t t = 0; t < a.sequence.length(); ++t)
    CHECK(pose::check_constraints(a.sequence.frame(t), a.sequence.layout).ok());
  const model::Generated raw = model::generate(m, c.heldout[0].features, Rng(3), {false, 1});
  CHECK(raw.sequence.length() == c.heldout[0].features.text.length());
}

TEST_CASE("training forward matches inference before finalize") {
  const corpus::Corpus c = corpus::synthesize(tiny_synth());
  model::ModelConfig mc = tiny_model();
  mc.post.constraints_enabled = false;
  const model::Model m = model::init_model(mc, pose::default_layout(), model::pose_stats(corpus::poses(c.train)));
  const Rng rng(4);
  const auto noise = model::chain_noise(rng, mc, c.train[0].features.text.length());
  ad::Graph g;
  Binder b(g, m.params);
  const auto out = model::generator_forward(b, m, c.train[0].features, noise);
  REQUIRE(out.size() == mc.diffusion.n_chains);
  const model::Generated gen = model::generate(m, c.train[0].features, rng);
  CHECK(out[0].value().rows() == gen.sequence.length());
}

TEST_CASE("short training run is deterministic") {
  const corpus::Corpus c = corpus::synthesize(tiny_synth());
  const auto stats = model::pose_stats(corpus::poses(c.train));
  training::TrainConfig tc;
  tc.epochs = 3;
  tc.lr = 1e-3;
  tc.disc_warmup_steps = 2;
  const auto run = [&] {
    return training::train(model::init_model(tiny_model(), pose::default_layout(), stats), c.train, c.heldout, tc);
  };
  const training::TrainResult a = run(), b = run();
  CHECK(a.report.csv() == b.report.csv());
  CHECK(a.model.params == b.model.params);
  CHECK(a.epochs_done == 3);
  const std::string csv = a.report.csv();
  CHECK(csv.rfind("epoch,l_g,l_d,grs,fgd,seconds\n", 0) == 0);

  tc.epochs = 0;
  const training::TrainResult z = run();
  CHECK(z.report.epochs.empty());
}

TEST_CASE("non-adversarial training leaves the generator untouched") {
  const corpus::Corpus c = corpus::synthesize(tiny_synth());
  const auto stats = model::pose_stats(corpus::poses(c.train));
  const model::Model init = model::init_model(tiny_model(), pose::default_layout(), stats);
  training::TrainConfig tc;
  tc.epochs = 2;
  tc.adversarial = false;
  const training::TrainResult r = training::train(init, c.train, c.heldout, tc);
  for (const auto& [name, t] : init.params.all()) {
    if (model::is_generator_param(name)) CHECK(r.model.params.get(name) == t);
    if (name.rfind("disc.", 0) == 0) CHECK(r.model.params.get(name) != t);
  }
}

TEST_CASE("checkpoints round-trip") {
  const fs::path dir = scratch("ckpt");
  const model::Model m = model::init_model(tiny_model(), pose::default_layout(), std::nullopt);
  checkpoint::save(dir, {m, 4, {7, 12}});
  const checkpoint::Checkpoint back = checkpoint::load(dir);
  CHECK(back.model.params == m.params);
  CHECK(back.model.layout == m.layout);
  CHECK(back.epoch == 4);
  CHECK(back.rng_state.key == 7);
  CHECK(back.rng_state.counter == 12);
  CHECK(config::model_entries(back.model.config) == config::model_entries(m.config));
  std::ifstream is(dir / "manifest.json");
  const nlohmann::json j = nlohmann::json::parse(is);
  CHECK(j["format"] == "lblm-checkpoint");
  CHECK(j["rng_state"]["algorithm"] == "philox4x32-10");
  fs::remove_all(dir);
}

TEST_CASE("corrupted checkpoint tensors are detected") {
  const fs::path dir = scratch("ckpt_bad");
  checkpoint::save(dir, {model::init_model(tiny_model(), pose::default_layout(), std::nullopt), 0, {}});
  {
    std::ofstream os(dir / "decoder.b_out.lbt", std::ios::binary | std::ios::app);
    os << "x";
  }
  CHECK_THROWS(checkpoint::load(dir));
  fs::remove_all(dir);
}
