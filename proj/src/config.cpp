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

#include "lblm/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "lblm/error.hpp"

namespace lblm::config {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<bool> parse_bool(const std::string& v) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  return std::nullopt;
}

template <typename T>
std::optional<T> parse_number(const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) return std::nullopt;
  return out;
}

std::string fmt_double(double v) { return fmt::format("{:.17g}", v); }
std::string fmt_bool(bool v) { return v ? "true" : "false"; }

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "seed", "corpus_dir", "checkpoint_dir", "out_dir", "threads",
      "synth.n_sequences", "synth.n_heldout", "synth.family", "synth.frames", "synth.fps", "synth.text_len",
      "synth.audio_len", "synth.video_len", "synth.jitter", "synth.seed",
      "model.text_dim", "model.audio_dim", "model.video_dim", "model.multimodal_embed",
      "model.decoder_mean_init", "model.init_seed",
      "encoder.d", "encoder.layers", "encoder.heads", "encoder.segment_len", "encoder.pose_latent_dim",
      "encoder.ffn_hidden", "encoder.xl_memory",
      "diffusion.n_chains", "diffusion.k_steps", "diffusion.seed", "diffusion.select", "diffusion.hidden",
      "diffusion.beta_init",
      "refine.temperature", "refine.heads", "refine.qk_dim", "refine.enable_mha", "refine.enable_weighted",
      "post.smooth_k", "post.smooth_sigma", "post.smooth_mode", "post.smoothing", "post.align",
      "post.align_key_dim", "post.order", "post.constraints",
      "disc.hidden",
      "train.batch_size", "train.lr", "train.epochs", "train.disc_steps_per_gen_step", "train.seed",
      "train.cosine", "train.weight_decay", "train.adversarial", "train.disc_warmup_steps",
      "metrics.seed", "metrics.gdi_mode", "metrics.feature_net_seed"};
  return keys;
}

RunConfig RunConfig::parse(const std::string& text, const std::string& origin) {
  RunConfig rc;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("{}:{}: expected key = value", origin, lineno));
    try {
      rc.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("{}:{}: {}", origin, lineno, e.what()));
    }
  }
  return rc;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse(ss.str(), path);
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto& keys = known_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError("unknown config key '" + key + "'");
  values_[key] = value;
}

void RunConfig::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void RunConfig::require(const std::vector<std::string>& keys) const {
  std::vector<std::string> missing;
  for (const auto& k : keys)
    if (!has(k)) missing.push_back(k);
  if (missing.empty()) return;
  std::string msg = "missing required config key";
  msg += missing.size() > 1 ? "s: " : ": ";
  for (std::size_t i = 0; i < missing.size(); ++i) msg += (i ? ", " : "") + missing[i];
  throw ConfigError(msg);
}

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::size_t RunConfig::get_size(const std::string& key, std::size_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const auto v = parse_number<std::size_t>(it->second);
  if (!v) throw ConfigError(fmt::format("{} must be a non-negative integer, got '{}'", key, it->second));
  return *v;
}

std::uint64_t RunConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const auto v = parse_number<std::uint64_t>(it->second);
  if (!v) throw ConfigError(fmt::format("{} must be an unsigned 64-bit integer, got '{}'", key, it->second));
  return *v;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const auto v = parse_number<double>(it->second);
  if (!v) throw ConfigError(fmt::format("{} must be a number, got '{}'", key, it->second));
  return *v;
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const auto v = parse_bool(it->second);
  if (!v) throw ConfigError(fmt::format("{} must be true/false or on/off, got '{}'", key, it->second));
  return *v;
}

std::uint64_t RunConfig::master_seed() const {
  if (seed_override_) return *seed_override_;
  if (const char* env = std::getenv("LBLM_SEED"); env && *env) {
    const auto v = parse_number<std::uint64_t>(trim(env));
    if (!v) throw ConfigError(fmt::format("LBLM_SEED must be an unsigned integer, got '{}'", env));
    return *v;
  }
  return get_u64("seed", 7);
}

model::ModelConfig model_config(const RunConfig& rc) {
  const std::uint64_t seed = rc.master_seed();
  model::ModelConfig c;
  c.text_dim = rc.get_size("model.text_dim", c.text_dim);
  c.audio_dim = rc.get_size("model.audio_dim", c.audio_dim);
  c.video_dim = rc.get_size("model.video_dim", c.video_dim);
  c.multimodal_embed = rc.get_bool("model.multimodal_embed", c.multimodal_embed);
  c.decoder_mean_init = rc.get_bool("model.decoder_mean_init", c.decoder_mean_init);
  c.init_seed = rc.get_u64("model.init_seed", seed);
  c.encoder.d = rc.get_size("encoder.d", c.encoder.d);
  c.encoder.layers = rc.get_size("encoder.layers", c.encoder.layers);
  c.encoder.heads = rc.get_size("encoder.heads", c.encoder.heads);
  c.encoder.segment_len = rc.get_size("encoder.segment_len", c.encoder.segment_len);
  c.encoder.pose_latent_dim = rc.get_size("encoder.pose_latent_dim", c.encoder.pose_latent_dim);
  c.encoder.ffn_hidden = rc.get_size("encoder.ffn_hidden", c.encoder.ffn_hidden);
  c.encoder.xl_memory = rc.get_bool("encoder.xl_memory", c.encoder.xl_memory);
  c.diffusion.n_chains = rc.get_size("diffusion.n_chains", c.diffusion.n_chains);
  c.diffusion.k_steps = rc.get_size("diffusion.k_steps", c.diffusion.k_steps);
  c.diffusion.seed = rc.get_u64("diffusion.seed", seed);
  c.diffusion.select = diffusion::parse_chain_select(rc.get_string("diffusion.select", "first"));
  c.diffusion.hidden = rc.get_size("diffusion.hidden", c.diffusion.hidden);
  c.diffusion.beta_init = rc.get_double("diffusion.beta_init", c.diffusion.beta_init);
  c.diffusion.latent_dim = c.encoder.pose_latent_dim;
  c.refine.temperature = rc.get_double("refine.temperature", c.refine.temperature);
  c.refine.heads = rc.get_size("refine.heads", c.refine.heads);
  c.refine.qk_dim = rc.get_size("refine.qk_dim", c.refine.qk_dim);
  c.refine.enable_mha = rc.get_bool("refine.enable_mha", c.refine.enable_mha);
  c.refine.enable_weighted = rc.get_bool("refine.enable_weighted", c.refine.enable_weighted);
  c.post.smoothing.filter_size = rc.get_size("post.smooth_k", c.post.smoothing.filter_size);
  c.post.smoothing.sigma = rc.get_double("post.smooth_sigma", c.post.smoothing.sigma);
  c.post.smoothing.mode = post::parse_smoothing_mode(rc.get_string("post.smooth_mode", "normalized"));
  c.post.smoothing_enabled = rc.get_bool("post.smoothing", c.post.smoothing_enabled);
  c.post.align_enabled = rc.get_bool("post.align", c.post.align_enabled);
  c.post.align_key_dim = rc.get_size("post.align_key_dim", c.post.align_key_dim);
  c.post.order = post::parse_order(rc.get_string("post.order", "smooth_align"));
  c.post.constraints_enabled = rc.get_bool("post.constraints", c.post.constraints_enabled);
  c.disc_hidden = rc.get_size("disc.hidden", c.disc_hidden);
  model::validate(c);
  return c;
}

training::TrainConfig train_config(const RunConfig& rc) {
  training::TrainConfig c;
  c.batch_size = rc.get_size("train.batch_size", c.batch_size);
  c.lr = rc.get_double("train.lr", c.lr);
  c.epochs = rc.get_size("train.epochs", c.epochs);
  c.disc_steps_per_gen_step = rc.get_size("train.disc_steps_per_gen_step", c.disc_steps_per_gen_step);
  c.seed = rc.get_u64("train.seed", rc.master_seed());
  c.cosine = rc.get_bool("train.cosine", c.cosine);
  c.weight_decay = rc.get_double("train.weight_decay", c.weight_decay);
  c.adversarial = rc.get_bool("train.adversarial", c.adversarial);
  c.disc_warmup_steps = rc.get_size("train.disc_warmup_steps", c.disc_warmup_steps);
  c.metric_seed = rc.get_u64("metrics.seed", c.metric_seed);
  c.threads = rc.get_size("threads", c.threads);
  training::validate(c);
  return c;
}

corpus::SynthConfig synth_config(const RunConfig& rc) {
  corpus::SynthConfig c;
  c.n_sequences = rc.get_size("synth.n_sequences", c.n_sequences);
  c.n_heldout = rc.get_size("synth.n_heldout", c.n_heldout);
  c.family = corpus::parse_family(rc.get_string("synth.family", "mixed"));
  c.frames = rc.get_size("synth.frames", c.frames);
  c.fps = rc.get_double("synth.fps", c.fps);
  c.text_len = rc.get_size("synth.text_len", c.text_len);
  c.audio_len = rc.get_size("synth.audio_len", c.audio_len);
  c.video_len = rc.get_size("synth.video_len", c.video_len);
  c.jitter = rc.get_double("synth.jitter", c.jitter);
  c.text_dim = rc.get_size("model.text_dim", c.text_dim);
  c.audio_dim = rc.get_size("model.audio_dim", c.audio_dim);
  c.video_dim = rc.get_size("model.video_dim", c.video_dim);
  c.seed = rc.get_u64("synth.seed", rc.master_seed());
  return c;
}

std::map<std::string, std::string> model_entries(const model::ModelConfig& c) {
  return {
      {"model.text_dim", std::to_string(c.text_dim)},
      {"model.audio_dim", std::to_string(c.audio_dim)},
      {"model.video_dim", std::to_string(c.video_dim)},
      {"model.multimodal_embed", fmt_bool(c.multimodal_embed)},
      {"model.decoder_mean_init", fmt_bool(c.decoder_mean_init)},
      {"model.init_seed", std::to_string(c.init_seed)},
      {"encoder.d", std::to_string(c.encoder.d)},
      {"encoder.layers", std::to_string(c.encoder.layers)},
      {"encoder.heads", std::to_string(c.encoder.heads)},
      {"encoder.segment_len", std::to_string(c.encoder.segment_len)},
      {"encoder.pose_latent_dim", std::to_string(c.encoder.pose_latent_dim)},
      {"encoder.ffn_hidden", std::to_string(c.encoder.ffn_hidden)},
      {"encoder.xl_memory", fmt_bool(c.encoder.xl_memory)},
      {"diffusion.n_chains", std::to_string(c.diffusion.n_chains)},
      {"diffusion.k_steps", std::to_string(c.diffusion.k_steps)},
      {"diffusion.seed", std::to_string(c.diffusion.seed)},
      {"diffusion.select", diffusion::chain_select_name(c.diffusion.select)},
      {"diffusion.hidden", std::to_string(c.diffusion.hidden)},
      {"diffusion.beta_init", fmt_double(c.diffusion.beta_init)},
      {"refine.temperature", fmt_double(c.refine.temperature)},
      {"refine.heads", std::to_string(c.refine.heads)},
      {"refine.qk_dim", std::to_string(c.refine.qk_dim)},
      {"refine.enable_mha", fmt_bool(c.refine.enable_mha)},
      {"refine.enable_weighted", fmt_bool(c.refine.enable_weighted)},
      {"post.smooth_k", std::to_string(c.post.smoothing.filter_size)},
      {"post.smooth_sigma", fmt_double(c.post.smoothing.sigma)},
      {"post.smooth_mode", post::smoothing_mode_name(c.post.smoothing.mode)},
      {"post.smoothing", fmt_bool(c.post.smoothing_enabled)},
      {"post.align", fmt_bool(c.post.align_enabled)},
      {"post.align_key_dim", std::to_string(c.post.align_key_dim)},
      {"post.order", post::order_name(c.post.order)},
      {"post.constraints", fmt_bool(c.post.constraints_enabled)},
      {"disc.hidden", std::to_string(c.disc_hidden)},
  };
}

}  // namespace lblm::config
