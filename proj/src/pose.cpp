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

#include "lblm/pose.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lblm/error.hpp"

namespace lblm::pose {
namespace {

constexpr double kLengthTol = 1e-12;
constexpr double kAngleTol = 1e-12;

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec3 add(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
Vec3 mul(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

// Angle in [0, pi] between two nonzero vectors.
double angle_between(const Vec3& a, const Vec3& b) {
  const Vec3 c{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
  return std::atan2(norm(c), dot(a, b));
}

// Unit vector orthogonal to unit u, preferring the component of w.
Vec3 orthogonal_toward(const Vec3& u, const Vec3& w) {
  Vec3 perp = sub(w, mul(u, dot(w, u)));
  double n = norm(perp);
  if (n < 1e-12) {
    // w is (anti)parallel to u: fall back to the coordinate axis least aligned with u.
    std::size_t axis = 0;
    for (std::size_t k = 1; k < 3; ++k)
      if (std::abs(u[k]) < std::abs(u[axis])) axis = k;
    Vec3 e{0.0, 0.0, 0.0};
    e[axis] = 1.0;
    perp = sub(e, mul(u, dot(e, u)));
    n = norm(perp);
  }
  return mul(perp, 1.0 / n);
}

bool length_ok(double n, double target) { return std::abs(n - target) <= kLengthTol * std::max(1.0, target); }

}  // namespace

std::size_t BodyLayout::root() const {
  for (std::size_t j = 0; j < parent.size(); ++j)
    if (!parent[j]) return j;
  throw LayoutError("layout has no root joint");
}

std::vector<std::size_t> BodyLayout::topological_order() const {
  std::vector<std::size_t> order;
  order.reserve(joint_count());
  std::vector<bool> placed(joint_count(), false);
  order.push_back(root());
  placed[root()] = true;
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (std::size_t j = 0; j < joint_count(); ++j) {
      if (!placed[j] && parent[j] && *parent[j] == order[head]) {
        order.push_back(j);
        placed[j] = true;
      }
    }
  }
  return order;
}

std::size_t BodyLayout::depth(std::size_t joint) const {
  std::size_t d = 0;
  for (auto p = parent[joint]; p; p = parent[*p]) ++d;
  return d;
}

std::optional<std::size_t> BodyLayout::joint_index(const std::string& name) const {
  auto it = std::find(joints.begin(), joints.end(), name);
  if (it == joints.end()) return std::nullopt;
  return static_cast<std::size_t>(it - joints.begin());
}

void validate(const BodyLayout& layout) {
  const std::size_t n = layout.joint_count();
  if (n == 0) throw LayoutError("layout has no joints");
  if (layout.parent.size() != n || layout.bone_length.size() != n || layout.angle_limits.size() != n) {
    throw LayoutError("layout arrays must all have one entry per joint");
  }
  std::size_t roots = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (!layout.parent[j]) {
      ++roots;
      continue;
    }
    if (*layout.parent[j] >= n || *layout.parent[j] == j) {
      throw LayoutError("joint '" + layout.joints[j] + "' has an invalid parent");
    }
    if (!(layout.bone_length[j] > 0.0) || !std::isfinite(layout.bone_length[j])) {
      throw LayoutError("joint '" + layout.joints[j] + "' needs a positive bone length");
    }
  }
  if (roots != 1) throw LayoutError("layout must have exactly one root, found " + std::to_string(roots));
  // Every joint must reach the root without revisiting a joint.
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t steps = 0;
    for (auto p = layout.parent[j]; p; p = layout.parent[*p]) {
      if (++steps > n) throw LayoutError("parent links contain a cycle at '" + layout.joints[j] + "'");
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    const AngleLimit& lim = layout.angle_limits[j];
    if (!(lim.min <= lim.max) || lim.min < 0.0 || lim.max > std::numbers::pi + 1e-12) {
      throw LayoutError("joint '" + layout.joints[j] + "' has invalid angle limits");
    }
  }
  std::vector<int> seen(n, 0);
  for (const BodyPart& part : layout.parts) {
    for (std::size_t j : part.joints) {
      if (j >= n) throw LayoutError("part '" + part.name + "' references joint out of range");
      ++seen[j];
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (seen[j] != 1) {
      throw LayoutError("parts must partition the joints; '" + layout.joints[j] + "' appears " +
                        std::to_string(seen[j]) + " times");
    }
  }
}

BodyLayout default_layout() {
  BodyLayout l;
  l.joints = {"pelvis",     "spine",   "neck",    "head",  "l_shoulder", "l_elbow", "l_wrist",
              "r_shoulder", "r_elbow", "r_wrist", "l_hip", "l_knee",     "r_hip",   "r_knee"};
  l.parent = {std::nullopt, 0, 1, 2, 2, 4, 5, 2, 7, 8, 0, 10, 0, 12};
  l.bone_length = {0.0, 0.25, 0.25, 0.15, 0.18, 0.28, 0.25, 0.18, 0.28, 0.25, 0.10, 0.42, 0.10, 0.42};
  const double pi = std::numbers::pi;
  l.angle_limits = {
      {0.0, pi},  {0.0, pi},  {0.0, 0.5}, {0.0, 0.7}, {1.3, 2.1}, {0.0, 2.8}, {0.0, 2.6},
      {1.3, 2.1}, {0.0, 2.8}, {0.0, 2.6}, {0.0, pi},  {0.7, 2.1}, {0.0, pi},  {0.7, 2.1},
  };
  l.parts = {{"torso", {0, 1, 2, 3}},
             {"left_arm", {4, 5, 6}},
             {"right_arm", {7, 8, 9}},
             {"left_leg", {10, 11}},
             {"right_leg", {12, 13}}};
  return l;
}

PoseVector PoseSequence::frame(std::size_t t) const {
  auto r = frames.row(t);
  return PoseVector{std::vector<double>(r.begin(), r.end())};
}

void PoseSequence::set_frame(std::size_t t, const PoseVector& p) {
  if (p.dim() != frames.cols()) throw LayoutError("frame width mismatch");
  std::copy(p.coords.begin(), p.coords.end(), frames.row(t).begin());
}

void validate(const PoseSequence& seq) {
  validate(seq.layout);
  if (!(seq.fps > 0.0) || !std::isfinite(seq.fps)) throw LayoutError("fps must be positive");
  if (!seq.frames.empty() && seq.frames.cols() != seq.layout.dim()) {
    throw LayoutError("frames have width " + std::to_string(seq.frames.cols()) + ", layout needs " +
                      std::to_string(seq.layout.dim()));
  }
  if (!seq.frames.all_finite()) throw LayoutError("frames contain non-finite values");
}

std::vector<std::vector<double>> decompose(const PoseVector& p, const BodyLayout& layout) {
  if (p.dim() != layout.dim()) {
    throw LayoutError("pose has " + std::to_string(p.dim()) + " coordinates, layout needs " +
                      std::to_string(layout.dim()));
  }
  std::vector<std::vector<double>> out;
  out.reserve(layout.parts.size());
  for (const BodyPart& part : layout.parts) {
    std::vector<double> sub;
    sub.reserve(3 * part.joints.size());
    for (std::size_t j : part.joints) sub.insert(sub.end(), p.coords.begin() + 3 * j, p.coords.begin() + 3 * j + 3);
    out.push_back(std::move(sub));
  }
  return out;
}

PoseVector assemble(const std::vector<std::vector<double>>& parts, const BodyLayout& layout) {
  if (parts.size() != layout.parts.size()) throw LayoutError("part count mismatch");
  PoseVector p{std::vector<double>(layout.dim(), 0.0)};
  for (std::size_t b = 0; b < parts.size(); ++b) {
    const auto& joints = layout.parts[b].joints;
    if (parts[b].size() != 3 * joints.size()) throw LayoutError("part '" + layout.parts[b].name + "' width mismatch");
    for (std::size_t k = 0; k < joints.size(); ++k)
      std::copy_n(parts[b].begin() + 3 * k, 3, p.coords.begin() + 3 * joints[k]);
  }
  return p;
}

PoseVector enforce_constraints(const PoseVector& p, const BodyLayout& layout) {
  if (p.dim() != layout.dim()) throw LayoutError("pose does not conform to layout");
  const std::size_t n = layout.joint_count();
  const std::size_t root = layout.root();
  const auto order = layout.topological_order();

  // Work on bone vectors so a bone's fix never drags its descendants' directions.
  std::vector<Vec3> bone(n, Vec3{0.0, 0.0, 0.0});
  std::vector<bool> changed(n, false);
  for (std::size_t j : order) {
    if (j == root) continue;
    bone[j] = sub(p.joint(j), p.joint(*layout.parent[j]));
  }

  auto fix_length = [&](std::size_t j) {
    const double target = layout.bone_length[j];
    const double len = norm(bone[j]);
    if (len < 1e-12) {
      const std::size_t par = *layout.parent[j];
      Vec3 dir{1.0, 0.0, 0.0};
      if (par != root) dir = mul(bone[par], 1.0 / norm(bone[par]));
      bone[j] = mul(dir, target);
      changed[j] = true;
    } else if (!length_ok(len, target)) {
      bone[j] = mul(bone[j], target / len);
      changed[j] = true;
    }
  };

  for (std::size_t j : order)
    if (j != root) fix_length(j);

  for (std::size_t j : order) {
    if (j == root || *layout.parent[j] == root) continue;
    const Vec3& up = bone[*layout.parent[j]];
    const double theta = angle_between(bone[j], up);
    const AngleLimit& lim = layout.angle_limits[j];
    if (theta >= lim.min - kAngleTol && theta <= lim.max + kAngleTol) continue;
    const double target = std::clamp(theta, lim.min, lim.max);
    const Vec3 u = mul(up, 1.0 / norm(up));
    const Vec3 w = orthogonal_toward(u, bone[j]);
    const Vec3 dir = add(mul(u, std::cos(target)), mul(w, std::sin(target)));
    bone[j] = mul(dir, layout.bone_length[j]);
    changed[j] = true;
  }

  for (std::size_t j : order)
    if (j != root) fix_length(j);

  PoseVector out = p;
  const Vec3 origin{0.0, 0.0, 0.0};
  std::vector<bool> moved(n, false);
  moved[root] = p.joint(root) != origin;
  out.set_joint(root, origin);
  for (std::size_t j : order) {
    if (j == root) continue;
    const std::size_t par = *layout.parent[j];
    moved[j] = moved[par] || changed[j];
    if (moved[j]) out.set_joint(j, add(out.joint(par), bone[j]));
  }
  return out;
}

Tensor embed_pose(const PoseVector& p, const PoseEmbeddingMatrix& e) {
  const Tensor& w = e.weights;
  if (w.rank() != 2 || w.rows() != p.dim()) {
    throw DimensionError("embed_pose: pose dim " + std::to_string(p.dim()) + " vs matrix " + shape_str(w.shape()));
  }
  Tensor row({1, p.dim()}, p.coords);
  return matmul(row, w).reshaped({w.cols()});
}

Tensor embed_frames(const Tensor& frames, const PoseEmbeddingMatrix& e) {
  if (frames.cols() != e.weights.rows()) throw DimensionError("embed_frames: width mismatch");
  return matmul(frames, e.weights);
}

ConstraintReport check_constraints(const PoseVector& p, const BodyLayout& layout) {
  ConstraintReport r;
  const std::size_t root = layout.root();
  for (std::size_t j = 0; j < layout.joint_count(); ++j) {
    if (j == root) continue;
    const std::size_t par = *layout.parent[j];
    const Vec3 b = sub(p.joint(j), p.joint(par));
    r.max_bone_error = std::max(r.max_bone_error, std::abs(norm(b) - layout.bone_length[j]));
    ++r.bones_checked;
    if (par == root) continue;
    const Vec3 up = sub(p.joint(par), p.joint(*layout.parent[par]));
    const double theta = angle_between(b, up);
    const AngleLimit& lim = layout.angle_limits[j];
    r.max_angle_violation = std::max({r.max_angle_violation, lim.min - theta, theta - lim.max, 0.0});
    ++r.angles_checked;
  }
  return r;
}

ad::Var project_bone_lengths(ad::Var frames, const BodyLayout& layout) {
  const std::size_t n = layout.joint_count(), d = layout.dim();
  if (frames.cols() != d) throw LayoutError("project_bone_lengths: frame width does not match the layout");
  // bones = frames · diff, where bone j = p_j - p_parent(j) and the root bone is 0.
  Tensor diff({d, d});
  // positions = unit · chain, summing scaled unit bones along the path to the root.
  Tensor chain({d, d});
  for (std::size_t j = 0; j < n; ++j) {
    if (!layout.parent[j]) continue;
    for (std::size_t c = 0; c < 3; ++c) {
      diff.at(3 * j + c, 3 * j + c) = 1.0;
      diff.at(3 * *layout.parent[j] + c, 3 * j + c) = -1.0;
    }
    for (std::optional<std::size_t> a = j; a && layout.parent[*a]; a = layout.parent[*a]) {
      for (std::size_t c = 0; c < 3; ++c) chain.at(3 * *a + c, 3 * j + c) = layout.bone_length[*a];
    }
  }
  ad::Graph& g = frames.graph();
  const ad::Var unit = ad::normalize_groups(ad::matmul(frames, g.constant(std::move(diff))), 3);
  return ad::matmul(unit, g.constant(std::move(chain)));
}

}  // namespace lblm::pose
