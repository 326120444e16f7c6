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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lblm/corpus.hpp"
#include "lblm/model.hpp"
#include "lblm/training.hpp"

// Plain-text key=value run configuration. Lines are `key = value`; '#' starts
// a comment. Every key must be known; command-line --set and dedicated flags
// override file values.

namespace lblm::config {

class RunConfig {
 public:
  static RunConfig parse(const std::string& text, const std::string& origin = "<string>");
  static RunConfig load(const std::string& path);

  // Throws ConfigError for unknown keys or malformed values.
  void set(const std::string& key, const std::string& value);
  // "key=value" form used by --set.
  void set_assignment(const std::string& assignment);
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  // Throws ConfigError listing every missing key by name.
  void require(const std::vector<std::string>& keys) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // Master seed: an explicit override wins, then LBLM_SEED, then the `seed`
  // key.
  std::uint64_t master_seed() const;
  void override_seed(std::uint64_t seed) { seed_override_ = seed; }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::optional<std::uint64_t> seed_override_;
};

const std::vector<std::string>& known_keys();

model::ModelConfig model_config(const RunConfig& rc);
training::TrainConfig train_config(const RunConfig& rc);
corpus::SynthConfig synth_config(const RunConfig& rc);

// Canonical key=value map of every model setting, for checkpoints.
std::map<std::string, std::string> model_entries(const model::ModelConfig& cfg);

}  // namespace lblm::config
