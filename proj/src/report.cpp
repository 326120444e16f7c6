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

#include "lblm/report.hpp"

#include "lblm/error.hpp"
#include "lblm/model.hpp"

namespace lblm::metrics {

MetricReport compute_report(Corpus real, Corpus gen, const disc::Discriminator* d, const ReportOptions& opts) {
  if (real.empty() || gen.empty()) throw ParameterError("metrics: both corpora must be nonempty");
  const std::size_t dim = real.front().cols();
  for (Corpus c : {real, gen})
    for (const Tensor& t : c)
      if (t.cols() != dim) throw LayoutError("metrics: sequences use different pose widths");
  MetricReport r;
  r.options = opts;
  const pose::PoseEmbeddingMatrix embed = model::metric_embedding(dim, opts.embedding_seed);
  const FeatureNet net = FeatureNet::create(opts.feature_net_seed, dim);
  r.fgd = fgd(real, gen, embed);
  r.fid = fid(real, gen, net);
  r.apd = apd(gen);
  if (d) r.grs = grs(gen, d);
  r.gdi = gen.size() >= 2 ? gdi(gen, embed, opts.gdi_mode) : 0.0;
  r.real_sequences = real.size();
  r.gen_sequences = gen.size();
  for (const Tensor& t : real) r.real_frames += t.rows();
  for (const Tensor& t : gen) r.gen_frames += t.rows();
  return r;
}

nlohmann::json to_json(const MetricReport& r) {
  nlohmann::json j = {
      {"fgd", r.fgd},
      {"fid", r.fid},
      {"apd", r.apd},
      {"grs", r.grs ? nlohmann::json(*r.grs) : nlohmann::json(nullptr)},
      {"gdi", r.gdi},
      {"gdi_mode", r.options.gdi_mode == GdiMode::kNormalized ? "normalized" : "raw"},
      {"feature_net_seed", r.options.feature_net_seed},
      {"embedding_seed", r.options.embedding_seed},
      {"corpus_sizes", {{"real", r.real_sequences}, {"gen", r.gen_sequences}}},
      {"frame_counts", {{"real", r.real_frames}, {"gen", r.gen_frames}}},
      {"notes",
       {"fid uses a fixed random temporal-conv feature net, not a pretrained recognizer; values are comparable "
        "only under the same feature_net_seed",
        "grs is measured with this repository's own discriminator"}},
  };
  return j;
}

}  // namespace lblm::metrics
