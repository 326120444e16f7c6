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
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lblm/encoder.hpp"
#include "lblm/model.hpp"
#include "lblm/pose.hpp"

// Seeded synthetic corpus of arm-wave and pointing motions with matching
// text, audio and video feature tracks, plus the on-disk corpus layout:
//   <dir>/manifest.json
//   <dir>/<split>/<id>.gsq.json
//   <dir>/<split>/<id>.<modality>.ftr  (+ .ftr.json sidecar)

namespace lblm::corpus {

enum class Family { kWave, kPoint, kMixed };
Family parse_family(const std::string& name);
std::string family_name(Family f);

struct SynthConfig {
  std::size_t n_sequences = 4;
  std::size_t n_heldout = 2;
  Family family = Family::kMixed;
  std::size_t frames = 32;
  double fps = 15.0;
  std::size_t text_len = 16;
  std::size_t audio_len = 32;
  std::size_t video_len = 16;
  std::size_t text_dim = 8;
  std::size_t audio_dim = 8;
  std::size_t video_dim = 12;
  double jitter = 0.01;
  std::uint64_t seed = 7;
};

nlohmann::json to_json(const SynthConfig& cfg);

struct Item {
  std::string id;
  pose::PoseSequence pose;
  model::Conditioning features;
  std::string family;
};

struct Corpus {
  std::vector<Item> train;
  std::vector<Item> heldout;
};

// One sequence of the given family (kMixed is not accepted here).
Item synth_item(const SynthConfig& cfg, Family family, std::size_t index, Rng rng);
Corpus synthesize(const SynthConfig& cfg);

// Feature track files.
void write_track(const std::filesystem::path& path, const encoder::FeatureTrack& t);
encoder::FeatureTrack read_track(const std::filesystem::path& path);

// Writes both splits and manifest.json; returns the manifest.
nlohmann::json write_corpus(const std::filesystem::path& dir, const Corpus& c, const nlohmann::json& generator);
// Items of one split ("train" or "heldout"), sorted by id.
std::vector<Item> read_split(const std::filesystem::path& dir, const std::string& split);
// Features only, keyed by file stem; used by generate.
model::Conditioning read_conditioning(const std::filesystem::path& dir, const std::string& id);

// Every *.gsq.json directly in `dir`, sorted by file name.
std::vector<std::filesystem::path> list_gestures(const std::filesystem::path& dir);

std::vector<pose::PoseSequence> poses(const std::vector<Item>& items);
std::vector<Tensor> frames(const std::vector<pose::PoseSequence>& seqs);

}  // namespace lblm::corpus
