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

#include <json.hpp>

#include "lblm/model.hpp"

// Checkpoint directory: one "<name>.lbt" LBT1 file per parameter plus
// manifest.json {"format", "version", "config", "layout", "epoch",
// "rng_state", "tensors": [{"name", "file", "shape", "digest"}]}.

namespace lblm::checkpoint {

struct RngState {
  std::uint64_t key = 0;
  std::uint64_t counter = 0;
};

struct Checkpoint {
  model::Model model;
  std::size_t epoch = 0;
  RngState rng_state;
};

void save(const std::filesystem::path& dir, const Checkpoint& c);
Checkpoint load(const std::filesystem::path& dir);

}  // namespace lblm::checkpoint
