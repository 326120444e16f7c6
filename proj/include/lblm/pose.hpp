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

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lblm/autodiff.hpp"
#include "lblm/tensor.hpp"

namespace lblm::pose {

struct BodyPart {
  std::string name;
  std::vector<std::size_t> joints;

  friend bool operator==(const BodyPart&, const BodyPart&) = default;
};

struct AngleLimit {
  double min = 0.0;
  double max = 0.0;

  friend bool operator==(const AngleLimit&, const AngleLimit&) = default;
};

// Skeleton schema. parent[root] is nullopt; bone_length[j] is the length of
// the bone parent[j] -> j and is ignored at the root. angle_limits[j] bounds
// the angle between bone parent[j] -> j and bone parent[parent[j]] -> parent[j];
// it is ignored for joints without a grandparent.
struct BodyLayout {
  std::vector<std::string> joints;
  std::vector<std::optional<std::size_t>> parent;
  std::vector<double> bone_length;
  std::vector<AngleLimit> angle_limits;
  std::vector<BodyPart> parts;

  std::size_t joint_count() const { return joints.size(); }
  std::size_t dim() const { return 3 * joints.size(); }
  std::size_t root() const;
  // Joints ordered so every parent precedes its children.
  std::vector<std::size_t> topological_order() const;
  std::size_t depth(std::size_t joint) const;
  std::optional<std::size_t> joint_index(const std::string& name) const;
  std::size_t part_dim(std::size_t b) const { return 3 * parts[b].joints.size(); }

  friend bool operator==(const BodyLayout&, const BodyLayout&) = default;
};

// Throws LayoutError describing the first violated invariant.
void validate(const BodyLayout& layout);

// 14-joint upper-body-plus-legs skeleton in five parts with all parts
// contiguous in joint order. Lengths in meters, y up, +x toward the subject's left.
BodyLayout default_layout();

using Vec3 = std::array<double, 3>;

struct PoseVector {
  std::vector<double> coords;

  std::size_t dim() const { return coords.size(); }
  Vec3 joint(std::size_t j) const { return {coords[3 * j], coords[3 * j + 1], coords[3 * j + 2]}; }
  void set_joint(std::size_t j, const Vec3& v) {
    coords[3 * j] = v[0];
    coords[3 * j + 1] = v[1];
    coords[3 * j + 2] = v[2];
  }

  friend bool operator==(const PoseVector&, const PoseVector&) = default;
};

// frames is T x D; each row is one PoseVector.
struct PoseSequence {
  BodyLayout layout;
  Tensor frames;
  double fps = 30.0;

  std::size_t length() const { return frames.empty() ? 0 : frames.rows(); }
  PoseVector frame(std::size_t t) const;
  void set_frame(std::size_t t, const PoseVector& p);
};

void validate(const PoseSequence& seq);

struct PoseEmbeddingMatrix {
  Tensor weights;  // D x d
};

std::vector<std::vector<double>> decompose(const PoseVector& p, const BodyLayout& layout);
// Inverse of decompose for any partition: scatters each part back to its joints.
PoseVector assemble(const std::vector<std::vector<double>>& parts, const BodyLayout& layout);

PoseVector enforce_constraints(const PoseVector& p, const BodyLayout& layout);

// e = Wᵀ p for W = E.weights (D x d).
Tensor embed_pose(const PoseVector& p, const PoseEmbeddingMatrix& e);
// Row-wise embedding of a T x D frame matrix, T x d.
Tensor embed_frames(const Tensor& frames, const PoseEmbeddingMatrix& e);

// Summary of constraint residuals; used by the CLI to report conformance.
struct ConstraintReport {
  double max_bone_error = 0.0;
  double max_angle_violation = 0.0;
  std::size_t bones_checked = 0;
  std::size_t angles_checked = 0;
  bool ok(double bone_tol = 1e-9, double angle_tol = 1e-9) const {
    return max_bone_error <= bone_tol && max_angle_violation <= angle_tol;
  }
};
ConstraintReport check_constraints(const PoseVector& p, const BodyLayout& layout);

// Differentiable bone-length projection of T x D frames: every bone vector is
// rescaled to its layout length and the skeleton is rebuilt from the root.
// Bone directions are kept; angle limits are not applied.
ad::Var project_bone_lengths(ad::Var frames, const BodyLayout& layout);

}  // namespace lblm::pose
