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

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include <json.hpp>

#include "lblm/discriminator.hpp"
#include "lblm/metrics.hpp"
#include "lblm/tensor.hpp"

namespace lblm::metrics {

struct ReportOptions {
  std::uint64_t embedding_seed = 11;
  std::uint64_t feature_net_seed = 11;
  GdiMode gdi_mode = GdiMode::kNormalized;
};

struct MetricReport {
  double fgd = 0.0;
  double fid = 0.0;
  double apd = 0.0;
  std::optional<double> grs;
  double gdi = 0.0;
  ReportOptions options;
  std::size_t real_sequences = 0, gen_sequences = 0;
  std::size_t real_frames = 0, gen_frames = 0;
};

// All five metrics of `gen` against `real`. GRS is computed only when a
// discriminator is supplied.
MetricReport compute_report(Corpus real, Corpus gen, const disc::Discriminator* d, const ReportOptions& opts);

nlohmann::json to_json(const MetricReport& r);

}  // namespace lblm::metrics
