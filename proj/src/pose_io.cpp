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

#include "lblm/pose_io.hpp"

#include <fstream>
#include <sstream>

#include "lblm/error.hpp"

namespace lblm::pose {

using nlohmann::json;

json layout_to_json(const BodyLayout& layout) {
  json parent = json::array();
  for (const auto& p : layout.parent) parent.push_back(p ? json(*p) : json(nullptr));
  json limits = json::array();
  for (const auto& lim : layout.angle_limits) limits.push_back({lim.min, lim.max});
  json parts = json::array();
  for (const auto& part : layout.parts) parts.push_back({{"name", part.name}, {"joints", part.joints}});
  std::vector<double> lengths = layout.bone_length;
  for (std::size_t j = 0; j < lengths.size(); ++j)
    if (!layout.parent[j]) lengths[j] = 0.0;
  return json{{"joints", layout.joints},
              {"parent", parent},
              {"bone_length", lengths},
              {"angle_limits", limits},
              {"parts", parts}};
}

BodyLayout layout_from_json(const json& j) {
  BodyLayout l;
  try {
    l.joints = j.at("joints").get<std::vector<std::string>>();
    for (const auto& p : j.at("parent")) {
      if (p.is_null()) {
        l.parent.emplace_back(std::nullopt);
      } else {
        l.parent.emplace_back(p.get<std::size_t>());
      }
    }
    l.bone_length = j.at("bone_length").get<std::vector<double>>();
    for (const auto& lim : j.at("angle_limits")) {
      if (!lim.is_array() || lim.size() != 2) throw LayoutError("angle_limits entries must be [min, max]");
      l.angle_limits.push_back({lim[0].get<double>(), lim[1].get<double>()});
    }
    for (const auto& part : j.at("parts")) {
      l.parts.push_back({part.at("name").get<std::string>(), part.at("joints").get<std::vector<std::size_t>>()});
    }
  } catch (const json::exception& e) {
    throw LayoutError(std::string("malformed layout: ") + e.what());
  }
  validate(l);
  return l;
}

json gesture_to_json(const GestureFile& g) {
  const PoseSequence& s = g.sequence;
  json frames = json::array();
  for (std::size_t t = 0; t < s.length(); ++t) {
    auto r = s.frames.row(t);
    frames.push_back(std::vector<double>(r.begin(), r.end()));
  }
  json out{{"schema_version", kGestureSchemaVersion},
           {"layout", layout_to_json(s.layout)},
           {"fps", s.fps},
           {"frames", frames}};
  if (!g.metadata.empty()) out["metadata"] = g.metadata;
  return out;
}

GestureFile gesture_from_json(const json& j) {
  GestureFile g;
  try {
    if (j.at("schema_version").get<int>() != kGestureSchemaVersion) {
      throw LayoutError("unsupported schema_version " + j.at("schema_version").dump());
    }
    g.sequence.layout = layout_from_json(j.at("layout"));
    g.sequence.fps = j.at("fps").get<double>();
    const auto& frames = j.at("frames");
    const std::size_t d = g.sequence.layout.dim();
    std::vector<double> data;
    data.reserve(frames.size() * d);
    for (const auto& f : frames) {
      if (!f.is_array() || f.size() != d) throw LayoutError("frame width does not match layout dimension");
      for (const auto& v : f) data.push_back(v.get<double>());
    }
    g.sequence.frames = Tensor({frames.size(), d}, std::move(data));
    if (j.contains("metadata")) g.metadata = j.at("metadata");
  } catch (const json::exception& e) {
    throw LayoutError(std::string("malformed gesture file: ") + e.what());
  }
  validate(g.sequence);
  return g;
}

std::string serialize_gesture(const GestureFile& g) { return gesture_to_json(g).dump() + "\n"; }

void write_gesture(const std::filesystem::path& path, const GestureFile& g) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << serialize_gesture(g);
  if (!os) throw IoError("write failed: " + path.string());
}

GestureFile read_gesture(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  try {
    return gesture_from_json(json::parse(is));
  } catch (const json::exception& e) {
    throw LayoutError(path.string() + ": " + e.what());
  } catch (const LayoutError& e) {
    throw LayoutError(path.string() + ": " + e.what());
  }
}

PoseSequence keypoints_to_sequence(const json& keypoints, const BodyLayout& layout, double fps) {
  if (!keypoints.is_array()) throw LayoutError("keypoints must be [frames][joints][3]");
  const std::size_t n = layout.joint_count();
  const std::size_t root = layout.root();
  PoseSequence s{layout, Tensor({keypoints.size(), layout.dim()}), fps};
  for (std::size_t t = 0; t < keypoints.size(); ++t) {
    const auto& frame = keypoints[t];
    if (!frame.is_array() || frame.size() != n) {
      throw LayoutError("frame " + std::to_string(t) + " must list " + std::to_string(n) + " joints");
    }
    Vec3 origin{};
    for (std::size_t k = 0; k < 3; ++k) origin[k] = frame[root].at(k).get<double>();
    for (std::size_t j = 0; j < n; ++j) {
      if (!frame[j].is_array() || frame[j].size() != 3) throw LayoutError("joint entries must be [x, y, z]");
      for (std::size_t k = 0; k < 3; ++k) s.frames.at(t, 3 * j + k) = frame[j][k].get<double>() - origin[k];
    }
  }
  validate(s);
  return s;
}

}  // namespace lblm::pose
