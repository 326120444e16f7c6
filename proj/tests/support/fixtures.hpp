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

#include <cmath>

#include "lblm/pose.hpp"
#include "lblm/rng.hpp"

namespace lblm::testing {

// A random pose near a valid skeleton: random bone directions laid out from
// the root with layout lengths, then every coordinate jittered by `noise`,
// plus a random root offset.
inline pose::PoseVector perturbed_pose(Rng& rng, const pose::BodyLayout& layout, double noise) {
  pose::PoseVector p{std::vector<double>(layout.dim(), 0.0)};
  for (std::size_t j : layout.topological_order()) {
    if (!layout.parent[j]) continue;
    pose::Vec3 d{rng.normal(), rng.normal(), rng.normal()};
    const double n = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) + 1e-12;
    const pose::Vec3 par = p.joint(*layout.parent[j]);
    p.set_joint(j, {par[0] + d[0] / n * layout.bone_length[j], par[1] + d[1] / n * layout.bone_length[j],
                    par[2] + d[2] / n * layout.bone_length[j]});
  }
  const double shift = rng.normal() * 0.1;
  for (double& c : p.coords) c += noise * rng.normal() + shift;
  return p;
}

}  // namespace lblm::testing
