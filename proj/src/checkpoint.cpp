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

#include "lblm/checkpoint.hpp"

#include <fstream>

#include "lblm/config.hpp"
#include "lblm/error.hpp"
#include "lblm/pose_io.hpp"
#include "lblm/tensor_io.hpp"

namespace lblm::checkpoint {

namespace fs = std::filesystem;
using json = nlohmann::json;

void save(const fs::path& dir, const Checkpoint& c) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create checkpoint directory " + dir.string());
  json tensors = json::array();
  for (const auto& [name, t] : c.model.params.all()) {
    const fs::path file = dir / (name + ".lbt");
    save_tensor(file, t);
    tensors.push_back({{"name", name}, {"file", file.filename().string()}, {"shape", t.shape()},
                       {"digest", file_digest(file)}});
  }
  const json manifest = {{"format", "lblm-checkpoint"},
                         {"version", 1},
                         {"config", config::model_entries(c.model.config)},
                         {"layout", pose::layout_to_json(c.model.layout)},
                         {"epoch", c.epoch},
                         {"rng_state", {{"algorithm", Rng::kAlgorithm}, {"key", c.rng_state.key},
                                        {"counter", c.rng_state.counter}}},
                         {"tensors", tensors}};
  std::ofstream os(dir / "manifest.json", std::ios::binary);
  os << manifest.dump(2) << "\n";
  if (!os) throw IoError("failed writing " + (dir / "manifest.json").string());
}

Checkpoint load(const fs::path& dir) {
  const fs::path mpath = dir / "manifest.json";
  std::ifstream is(mpath);
  if (!is) throw IoError("no checkpoint manifest at " + mpath.string());
  Checkpoint c;
  try {
    const json m = json::parse(is);
    if (m.at("format") != "lblm-checkpoint") throw IoError(mpath.string() + ": not a checkpoint manifest");
    config::RunConfig rc;
    for (const auto& [k, v] : m.at("config").items()) rc.set(k, v.get<std::string>());
    c.model.config = config::model_config(rc);
    c.model.layout = pose::layout_from_json(m.at("layout"));
    c.epoch = m.at("epoch").get<std::size_t>();
    c.rng_state.key = m.at("rng_state").at("key").get<std::uint64_t>();
    c.rng_state.counter = m.at("rng_state").at("counter").get<std::uint64_t>();
    for (const json& t : m.at("tensors")) {
      const fs::path file = dir / t.at("file").get<std::string>();
      if (t.contains("digest") && file_digest(file) != t.at("digest").get<std::string>()) {
        throw IoError(file.string() + ": digest does not match the manifest");
      }
      Tensor value = load_tensor(file);
      if (t.contains("shape") && value.shape() != t.at("shape").get<Shape>()) {
        throw IoError(file.string() + ": shape does not match the manifest");
      }
      c.model.params.set(t.at("name").get<std::string>(), std::move(value));
    }
  } catch (const json::exception& e) {
    throw IoError(mpath.string() + ": " + e.what());
  }
  return c;
}

}  // namespace lblm::checkpoint
