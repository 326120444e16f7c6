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

#include <filesystem>
#include <string>

#include <json.hpp>

#include "lblm/pose.hpp"

// ".gsq.json" gesture sequence files:
//   {"schema_version": 1,
//    "layout": {"joints": [..], "parent": [null | int], "bone_length": [..],
//               "angle_limits": [[min, max], ..], "parts": [{"name", "joints"}]},
//    "fps": f64, "frames": [[f64 x D], ..], "metadata": {..}}
// bone_length and angle_limits carry one entry per joint; the root's bone
// length is written as 0.

namespace lblm::pose {

inline constexpr int kGestureSchemaVersion = 1;

struct GestureFile {
  PoseSequence sequence;
  nlohmann::json metadata = nlohmann::json::object();
};

nlohmann::json layout_to_json(const BodyLayout& layout);
BodyLayout layout_from_json(const nlohmann::json& j);

nlohmann::json gesture_to_json(const GestureFile& g);
GestureFile gesture_from_json(const nlohmann::json& j);

std::string serialize_gesture(const GestureFile& g);
void write_gesture(const std::filesystem::path& path, const GestureFile& g);
// Parse and validate; errors name the file.
GestureFile read_gesture(const std::filesystem::path& path);

// External keypoints shaped [frames][joints][3] (world coordinates), made
// root-relative against `layout`.
PoseSequence keypoints_to_sequence(const nlohmann::json& keypoints, const BodyLayout& layout, double fps);

}  // namespace lblm::pose
