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

#include "lblm/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "lblm/error.hpp"
#include "lblm/pose_io.hpp"
#include "lblm/tensor_io.hpp"

namespace lblm::corpus {
namespace {

using json = nlohmann::json;
using pose::Vec3;
namespace fs = std::filesystem;

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kVocabulary = 6;

Vec3 unit(Vec3 v) {
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  return {v[0] / n, v[1] / n, v[2] / n};
}

std::size_t joint(const pose::BodyLayout& layout, const char* name) {
  const auto j = layout.joint_index(name);
  if (!j) throw LayoutError(std::string("synth: layout has no joint '") + name + "'");
  return *j;
}

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

struct MotionParams {
  double omega, amp, phase, sway;
};

// Bone directions for one frame at time s (seconds).
std::vector<Vec3> directions(const pose::BodyLayout& layout, Family family, const MotionParams& p, double s) {
  std::vector<Vec3> dir(layout.joint_count(), Vec3{0.0, -1.0, 0.0});
  auto set = [&](const char* name, Vec3 v) { dir[joint(layout, name)] = unit(v); };
  const double sw = p.sway * std::sin(0.3 * kTwoPi * s + p.phase);
  set("spine", {std::sin(sw), std::cos(sw), 0.0});
  set("neck", {std::sin(1.5 * sw), std::cos(1.5 * sw), 0.0});
  set("head", {std::sin(2.0 * sw), std::cos(2.0 * sw), 0.05});
  set("l_shoulder", {1.0, 0.0, 0.0});
  set("r_shoulder", {-1.0, 0.0, 0.0});
  set("l_hip", {1.0, -0.3, 0.0});
  set("r_hip", {-1.0, -0.3, 0.0});
  set("l_knee", {0.0, -1.0, 0.02});
  set("r_knee", {0.0, -1.0, 0.02});
  const double rest = 0.1 * std::sin(p.omega * s + p.phase);
  set("l_elbow", {0.15, -1.0, rest});
  set("l_wrist", {0.05, -1.0, 0.2 + rest});
  set("r_elbow", {-0.15, -1.0, rest});
  set("r_wrist", {-0.05, -1.0, 0.2 + rest});
  const double wave = std::sin(p.omega * s + p.phase);
  if (family == Family::kWave) {
    const double e = 0.9 + 0.15 * wave;
    set("r_elbow", {-std::cos(e), std::sin(e), 0.0});
    const double phi = p.amp * wave;
    set("r_wrist", {-std::sin(phi), std::cos(phi), 0.1});
  } else {
    const double b = 1.2 + p.amp * 0.5 * (1.0 - std::cos(p.omega * s + p.phase));
    set("l_elbow", {0.2, -std::cos(b), std::sin(b)});
    const double c = b + 0.2 * wave;
    set("l_wrist", {0.05, -std::cos(c), std::sin(c)});
  }
  return dir;
}

pose::PoseVector forward_kinematics(const pose::BodyLayout& layout, const std::vector<Vec3>& dir) {
  pose::PoseVector p{std::vector<double>(layout.dim(), 0.0)};
  for (std::size_t j : layout.topological_order()) {
    if (!layout.parent[j]) continue;
    const Vec3 base = p.joint(*layout.parent[j]);
    const double len = layout.bone_length[j];
    p.set_joint(j, {base[0] + len * dir[j][0], base[1] + len * dir[j][1], base[2] + len * dir[j][2]});
  }
  return p;
}

// Fixed per-family word vectors shared by every corpus.
Tensor vocabulary(Family family, std::size_t dim) {
  Rng rng(0x7e47ULL + static_cast<std::uint64_t>(family));
  return gaussian_sample(rng, {kVocabulary, dim});
}

void add_noise(Tensor& t, Rng& rng, double stddev) {
  for (double& v : t.values()) v += stddev * rng.normal();
}

json track_meta(const encoder::FeatureTrack& t) {
  return {{"modality", std::string(encoder::modality_name(t.modality))}, {"frame_rate", t.frame_rate}};
}

fs::path sidecar(const fs::path& p) { return fs::path(p.string() + ".json"); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  os << text;
  if (!os) throw IoError("failed writing " + path.string());
}

}  // namespace

Family parse_family(const std::string& name) {
  if (name == "wave") return Family::kWave;
  if (name == "point") return Family::kPoint;
  if (name == "mixed") return Family::kMixed;
  throw ConfigError("synth.family must be wave, point or mixed, got '" + name + "'");
}

std::string family_name(Family f) {
  switch (f) {
    case Family::kWave:
      return "wave";
    case Family::kPoint:
      return "point";
    case Family::kMixed:
      return "mixed";
  }
  return "mixed";
}

json to_json(const SynthConfig& c) {
  return {{"n_sequences", c.n_sequences}, {"n_heldout", c.n_heldout}, {"family", family_name(c.family)},
          {"frames", c.frames},           {"fps", c.fps},             {"text_len", c.text_len},
          {"audio_len", c.audio_len},     {"video_len", c.video_len}, {"text_dim", c.text_dim},
          {"audio_dim", c.audio_dim},     {"video_dim", c.video_dim}, {"jitter", c.jitter},
          {"seed", c.seed}};
}

Item synth_item(const SynthConfig& cfg, Family family, std::size_t index, Rng rng) {
  if (family == Family::kMixed) throw ParameterError("synth_item: pick a concrete family");
  if (cfg.frames == 0 || cfg.text_len == 0 || !(cfg.fps > 0.0)) throw ConfigError("synth: empty sequences requested");
  const pose::BodyLayout layout = pose::default_layout();
  MotionParams mp{};
  mp.omega = kTwoPi * uniform(rng, 0.6, 1.4);
  mp.amp = uniform(rng, 0.4, 0.9);
  mp.phase = uniform(rng, 0.0, kTwoPi);
  mp.sway = uniform(rng, 0.02, 0.08);

  Item item;
  item.family = family_name(family);
  item.id = "seq" + std::to_string(10000 + index).substr(1);
  item.pose = pose::PoseSequence{layout, Tensor({cfg.frames, layout.dim()}), cfg.fps};
  for (std::size_t t = 0; t < cfg.frames; ++t) {
    pose::PoseVector p = forward_kinematics(layout, directions(layout, family, mp, static_cast<double>(t) / cfg.fps));
    for (std::size_t i = 3; i < p.coords.size(); ++i) p.coords[i] += cfg.jitter * rng.normal();
    item.pose.set_frame(t, pose::enforce_constraints(p, layout));
  }

  const double duration = static_cast<double>(cfg.frames) / cfg.fps;
  auto rate = [&](std::size_t len) { return static_cast<double>(len) / duration; };

  Tensor audio({cfg.audio_len, cfg.audio_dim});
  for (std::size_t t = 0; t < cfg.audio_len; ++t) {
    const double s = static_cast<double>(t) / rate(cfg.audio_len);
    for (std::size_t c = 0; c < cfg.audio_dim; ++c) {
      const double arg = static_cast<double>(c / 2 + 1) * mp.omega * s + mp.phase;
      audio.at(t, c) = mp.amp * (c % 2 == 0 ? std::sin(arg) : std::cos(arg));
    }
  }
  add_noise(audio, rng, 0.05);

  const Tensor vocab = vocabulary(family, cfg.text_dim);
  Tensor text({cfg.text_len, cfg.text_dim});
  for (std::size_t t = 0; t < cfg.text_len; ++t) {
    const std::size_t w = static_cast<std::size_t>(rng.uniform() * kVocabulary) % kVocabulary;
    std::copy_n(vocab.data() + w * cfg.text_dim, cfg.text_dim, text.data() + t * cfg.text_dim);
  }
  add_noise(text, rng, 0.05);

  // Video rows summarise the visible arm joints of the nearest pose frame.
  const std::size_t joints[] = {joint(layout, "l_wrist"), joint(layout, "r_wrist"), joint(layout, "l_elbow"),
                                joint(layout, "r_elbow")};
  Tensor video({cfg.video_len, cfg.video_dim});
  for (std::size_t t = 0; t < cfg.video_len; ++t) {
    const std::size_t f = std::min(cfg.frames - 1, t * cfg.frames / std::max<std::size_t>(1, cfg.video_len));
    for (std::size_t c = 0; c < cfg.video_dim; ++c) {
      video.at(t, c) = item.pose.frames.at(f, 3 * joints[(c / 3) % 4] + c % 3);
    }
  }
  add_noise(video, rng, 0.02);

  item.features.text = {encoder::Modality::kText, std::move(text), rate(cfg.text_len)};
  item.features.audio = {encoder::Modality::kAudio, std::move(audio), rate(cfg.audio_len)};
  item.features.video = {encoder::Modality::kVideo, std::move(video), rate(cfg.video_len)};
  return item;
}

Corpus synthesize(const SynthConfig& cfg) {
  const Rng master(cfg.seed);
  auto family_of = [&](std::size_t i) {
    if (cfg.family != Family::kMixed) return cfg.family;
    return i % 2 == 0 ? Family::kWave : Family::kPoint;
  };
  Corpus c;
  for (std::size_t i = 0; i < cfg.n_sequences; ++i) c.train.push_back(synth_item(cfg, family_of(i), i, master.split(i)));
  for (std::size_t i = 0; i < cfg.n_heldout; ++i) {
    Item item = synth_item(cfg, family_of(i), i, master.split(1000000 + i));
    item.id = "held" + item.id.substr(3);
    c.heldout.push_back(std::move(item));
  }
  return c;
}

void write_track(const fs::path& path, const encoder::FeatureTrack& t) {
  save_tensor(path, t.data);
  write_text(sidecar(path), track_meta(t).dump(2) + "\n");
}

encoder::FeatureTrack read_track(const fs::path& path) {
  encoder::FeatureTrack t;
  t.data = load_tensor(path);
  if (t.data.rank() != 2) throw IoError(path.string() + ": feature tracks must be rank 2");
  std::ifstream is(sidecar(path));
  if (!is) throw IoError("missing sidecar " + sidecar(path).string());
  try {
    const json meta = json::parse(is);
    t.modality = encoder::parse_modality(meta.at("modality").get<std::string>());
    t.frame_rate = meta.at("frame_rate").get<double>();
  } catch (const json::exception& e) {
    throw IoError(sidecar(path).string() + ": " + e.what());
  }
  return t;
}

json write_corpus(const fs::path& dir, const Corpus& c, const json& generator) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create corpus directory " + dir.string());
  json files = json::array();
  auto emit = [&](const std::string& split, const std::vector<Item>& items) {
    const fs::path sub = dir / split;
    fs::create_directories(sub, ec);
    if (ec) throw IoError("cannot create " + sub.string());
    for (const Item& item : items) {
      const fs::path g = sub / (item.id + ".gsq.json");
      pose::write_gesture(g, {item.pose, {{"family", item.family}, {"source", "synth"}}});
      files.push_back({{"path", split + "/" + g.filename().string()}, {"digest", file_digest(g)}});
      for (const encoder::FeatureTrack* t : {&item.features.text, &item.features.audio, &item.features.video}) {
        const fs::path f = sub / (item.id + "." + std::string(encoder::modality_name(t->modality)) + ".ftr");
        write_track(f, *t);
        files.push_back({{"path", split + "/" + f.filename().string()}, {"digest", file_digest(f)}});
      }
    }
  };
  emit("train", c.train);
  emit("heldout", c.heldout);
  const json manifest = {{"format", "lblm-corpus"},
                         {"version", 1},
                         {"generator", generator},
                         {"train", c.train.size()},
                         {"heldout", c.heldout.size()},
                         {"files", files}};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

model::Conditioning read_conditioning(const fs::path& dir, const std::string& id) {
  model::Conditioning c;
  c.text = read_track(dir / (id + ".text.ftr"));
  c.audio = read_track(dir / (id + ".audio.ftr"));
  c.video = read_track(dir / (id + ".video.ftr"));
  return c;
}

std::vector<fs::path> list_gestures(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.size() > 9 && name.ends_with(".gsq.json")) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Item> read_split(const fs::path& dir, const std::string& split) {
  const fs::path sub = dir / split;
  std::vector<Item> items;
  if (!fs::is_directory(sub)) return items;
  for (const fs::path& g : list_gestures(sub)) {
    Item item;
    const std::string name = g.filename().string();
    item.id = name.substr(0, name.size() - 9);
    pose::GestureFile file = pose::read_gesture(g);
    item.pose = std::move(file.sequence);
    item.family = file.metadata.value("family", "");
    item.features = read_conditioning(sub, item.id);
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<pose::PoseSequence> poses(const std::vector<Item>& items) {
  std::vector<pose::PoseSequence> out;
  for (const Item& i : items) out.push_back(i.pose);
  return out;
}

std::vector<Tensor> frames(const std::vector<pose::PoseSequence>& seqs) {
  std::vector<Tensor> out;
  for (const auto& s : seqs) out.push_back(s.frames);
  return out;
}

}  // namespace lblm::corpus
