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

#include "lblm/autodiff.hpp"
#include "lblm/error.hpp"
#include "lblm/pose.hpp"
#include "lblm/pose_io.hpp"
#include "support/fixtures.hpp"
#include "support/gradcheck.hpp"

using namespace lblm;
using namespace lblm::pose;

TEST_CASE("default layout is valid") {
  const BodyLayout l = default_layout();
  CHECK_NOTHROW(validate(l));
  CHECK(l.joint_count() == 14);
  CHECK(l.dim() == 42);
  CHECK(l.root() == 0);
  CHECK(l.joint_index("head") == 3u);
  CHECK(!l.joint_index("tail"));
}

TEST_CASE("layout validation rejects cycles and bad partitions") {
  BodyLayout cyc = default_layout();
  cyc.parent[1] = 3;
  CHECK_THROWS_AS(validate(cyc), LayoutError);

  BodyLayout two_roots = default_layout();
  two_roots.parent[5] = std::nullopt;
  CHECK_THROWS_AS(validate(two_roots), LayoutError);

  BodyLayout overlap = default_layout();
  overlap.parts[1].joints.push_back(0);
  CHECK_THROWS_AS(validate(overlap), LayoutError);

  BodyLayout bad_len = default_layout();
  bad_len.bone_length[4] = -0.1;
  CHECK_THROWS_AS(validate(bad_len), LayoutError);
}

TEST_CASE("decompose and assemble are inverse") {
  Rng rng(1);
  const BodyLayout l = default_layout();
  const PoseVector p = testing::perturbed_pose(rng, l, 0.1);
  const auto parts = decompose(p, l);
  CHECK(parts.size() == l.parts.size());
  std::size_t total = 0;
  for (std::size_t b = 0; b < parts.size(); ++b) {
    CHECK(parts[b].size() == l.part_dim(b));
    total += parts[b].size();
  }
  CHECK(total == l.dim());
  CHECK(assemble(parts, l) == p);
  CHECK_THROWS_AS(decompose(PoseVector{std::vector<double>(5)}, l), LayoutError);
}

TEST_CASE("enforce_constraints produces a conforming, idempotent pose") {
  Rng rng(9);
  const BodyLayout l = default_layout();
  for (int i = 0; i < 200; ++i) {
    const PoseVector p = testing::perturbed_pose(rng, l, 0.2);
    const PoseVector q = enforce_constraints(p, l);
    const ConstraintReport r = check_constraints(q, l);
    CHECK(r.ok());
    CHECK(enforce_constraints(q, l) == q);
  }
}

TEST_CASE("a conforming pose is a fixed point") {
  Rng rng(4);
  const BodyLayout l = default_layout();
  const PoseVector q = enforce_constraints(testing::perturbed_pose(rng, l, 0.0), l);
  CHECK(check_constraints(q, l).ok());
  CHECK(enforce_constraints(q, l) == q);
}

TEST_CASE("degenerate zero-length bones are repaired") {
  const BodyLayout l = default_layout();
  const PoseVector zero{std::vector<double>(l.dim(), 0.0)};
  CHECK(check_constraints(enforce_constraints(zero, l), l).ok());
}

TEST_CASE("embedding is the transpose product") {
  PoseEmbeddingMatrix e{Tensor::from_rows({{1, 0}, {0, 2}, {1, 1}})};
  const Tensor out = embed_pose(PoseVector{{1, 2, 3}}, e);
  CHECK(out[0] == 4.0);
  CHECK(out[1] == 7.0);
}

TEST_CASE("gesture files round-trip byte-identically") {
  Rng rng(2);
  const BodyLayout l = default_layout();
  PoseSequence s{l, Tensor({3, l.dim()}), 24.0};
  for (std::size_t t = 0; t < 3; ++t) s.set_frame(t, testing::perturbed_pose(rng, l, 0.1));
  GestureFile g{s, {{"note", "x"}}};
  const std::string a = serialize_gesture(g);
  const GestureFile back = gesture_from_json(nlohmann::json::parse(a));
  CHECK(back.sequence.frames == s.frames);
  CHECK(back.sequence.layout == l);
  CHECK(serialize_gesture(back) == a);
}

TEST_CASE("gesture schema violations are rejected") {
  const BodyLayout l = default_layout();
  PoseSequence s{l, Tensor({1, l.dim()}), 24.0};
  nlohmann::json j = gesture_to_json({s, {}});
  j["frames"][0].erase(0);
  CHECK_THROWS(gesture_from_json(j));
  nlohmann::json k = gesture_to_json({s, {}});
  k["schema_version"] = 99;
  CHECK_THROWS(gesture_from_json(k));
}

TEST_CASE("keypoints are made root-relative") {
  const BodyLayout l = default_layout();
  nlohmann::json kp = nlohmann::json::array();
  nlohmann::json frame = nlohmann::json::array();
  for (std::size_t j = 0; j < l.joint_count(); ++j) frame.push_back({1.0 + j, 2.0, 3.0});
  kp.push_back(frame);
  const PoseSequence s = keypoints_to_sequence(kp, l, 30.0);
  CHECK(s.length() == 1);
  CHECK(s.frames.at(0, 0) == 0.0);
  CHECK(s.frames.at(0, 3) == 1.0);
  frame.erase(0);
  CHECK_THROWS_AS(keypoints_to_sequence(nlohmann::json::array({frame}), l, 30.0), LayoutError);
}

TEST_CASE("bone-length projection") {
  Rng rng(6);
  const BodyLayout l = default_layout();
  Tensor frames({4, l.dim()});
  for (std::size_t t = 0; t < 4; ++t) {
    const PoseVector p = testing::perturbed_pose(rng, l, 0.15);
    std::copy(p.coords.begin(), p.coords.end(), frames.row(t).begin());
  }
  ad::Graph g;
  const Tensor out = project_bone_lengths(g.constant(frames), l).value();
  for (std::size_t t = 0; t < 4; ++t) {
    for (std::size_t j = 1; j < l.joint_count(); ++j) {
      const std::size_t p = *l.parent[j];
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += std::pow(out.at(t, 3 * j + k) - out.at(t, 3 * p + k), 2);
      CHECK(std::sqrt(s) == doctest::Approx(l.bone_length[j]).epsilon(1e-7));
    }
    for (int k = 0; k < 3; ++k) CHECK(out.at(t, k) == 0.0);
  }
  const auto r = testing::grad_check("project_bone_lengths", {frames.slice_rows(0, 1)},
                                     [&](ad::Graph&, const std::vector<ad::Var>& v) {
                                       return testing::project(project_bone_lengths(v[0], l));
                                     });
  CHECK(r.max_rel_error < 1e-5);
}
