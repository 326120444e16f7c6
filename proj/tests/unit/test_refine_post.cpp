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

#include <algorithm>
#include <cmath>

#include "lblm/error.hpp"
#include "lblm/params.hpp"
#include "lblm/postprocess.hpp"
#include "lblm/refine.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

using namespace lblm;

namespace {

double row_sum_error(const Tensor& a) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (double v : a.row(i)) {
      CHECK(v >= 0.0);
      s += v;
    }
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

}  // namespace

TEST_CASE("weighted refinement is a convex recombination of frames") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t t = 1 + trial % 9, d = 6, k = 4;
    const Tensor p = testing::random_tensor(rng, t, d, 2.0);
    const Tensor wq = testing::random_tensor(rng, k, d), wk = testing::random_tensor(rng, k, d);
    const double beta = 0.2 + rng.uniform() * 3.0;
    const Tensor a = refine::weighted_attention(p, wq, wk, beta);
    CHECK(row_sum_error(a) <= 1e-12);
    const Tensor out = refine::refine_weighted(p, wq, wk, beta);
    CHECK(max_abs_diff(out, matmul(a, p)) < 1e-12);
    for (std::size_t c = 0; c < d; ++c) {
      double lo = INFINITY, hi = -INFINITY;
      for (std::size_t j = 0; j < t; ++j) {
        lo = std::min(lo, p.at(j, c));
        hi = std::max(hi, p.at(j, c));
      }
      for (std::size_t i = 0; i < t; ++i) {
        CHECK(out.at(i, c) >= lo - 1e-12);
        CHECK(out.at(i, c) <= hi + 1e-12);
      }
    }
  }
}

TEST_CASE("sharpness moves weights toward the argmax") {
  Rng rng(2);
  const Tensor p = testing::random_tensor(rng, 5, 4);
  const Tensor wq = testing::random_tensor(rng, 3, 4), wk = testing::random_tensor(rng, 3, 4);
  const Tensor soft = refine::weighted_attention(p, wq, wk, 0.01);
  const Tensor sharp = refine::weighted_attention(p, wq, wk, 100.0);
  double max_soft = 0.0, max_sharp = 0.0;
  for (std::size_t j = 0; j < 5; ++j) {
    max_soft = std::max(max_soft, soft.at(0, j));
    max_sharp = std::max(max_sharp, sharp.at(0, j));
  }
  CHECK(max_soft < 0.3);
  CHECK(max_sharp > 0.99);
  CHECK_THROWS_AS(refine::weighted_attention(p, wq, wk, 0.0), ParameterError);
}

TEST_CASE("single frame cases are exact") {
  Rng rng(3);
  ParamStore s;
  refine::RefinerConfig cfg;
  refine::init_refiner(s, cfg, 8, Rng(4));
  const Tensor p = testing::random_tensor(rng, 1, 8);
  const auto ww = refine::load_weighted(s);
  CHECK(refine::refine_weighted(p, ww.w_q, ww.w_k, refine::learned_beta(ww)) == p);

  const auto mw = refine::load_mha(s);
  const Tensor value_path = testing::linear_loop(testing::linear_loop(p, mw.w_v, nullptr), mw.w_o, &mw.b_o);
  CHECK(max_abs_diff(refine::refine_mha(p, mw, cfg.heads), value_path) < 1e-15);

  post::AlignmentParams<Tensor> ap{testing::random_tensor(rng, 4, 3), testing::random_tensor(rng, 4, 8)};
  const Tensor src = testing::random_tensor(rng, 6, 3);
  const Tensor aligned = post::align_frames(src, p, ap);
  CHECK(aligned.rows() == 6);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t c = 0; c < 8; ++c) CHECK(aligned.at(i, c) == p.at(0, c));
}

TEST_CASE("mha attention recombines values") {
  Rng rng(5);
  ParamStore s;
  refine::RefinerConfig cfg;
  cfg.heads = 2;
  refine::init_refiner(s, cfg, 6, Rng(6));
  const Tensor p = testing::random_tensor(rng, 4, 6);
  const Tensor out = refine::refine_mha(p, refine::load_mha(s), 2);
  CHECK(out.rows() == 4);
  CHECK(out.cols() == 6);
  CHECK(out.all_finite());
  CHECK(refine::head_dim(42, 4) == 10);
}

TEST_CASE("alignment resamples to the source timeline") {
  Rng rng(7);
  post::AlignmentParams<Tensor> ap{testing::random_tensor(rng, 4, 3), testing::random_tensor(rng, 4, 5)};
  const Tensor src = testing::random_tensor(rng, 11, 3), g = testing::random_tensor(rng, 7, 5);
  const Tensor a = post::alignment_weights(src, g, ap);
  CHECK(a.rows() == 11);
  CHECK(a.cols() == 7);
  CHECK(row_sum_error(a) <= 1e-12);
  CHECK(max_abs_diff(post::align_frames(src, g, ap), matmul(a, g)) < 1e-12);
  CHECK_THROWS_AS(post::alignment_weights(Tensor(), g, ap), ParameterError);
}

TEST_CASE("refinement gradients") {
  Rng rng(8);
  ParamStore s;
  refine::RefinerConfig cfg;
  cfg.heads = 2;
  cfg.qk_dim = 3;
  refine::init_refiner(s, cfg, 4, Rng(9));
  const Tensor p = testing::random_tensor(rng, 3, 4);
  const auto r = testing::grad_check("refine", {p, s.get("refine.weighted.log_beta").reshaped({1, 1})},
                                     [&](ad::Graph& g, const std::vector<ad::Var>& v) {
                                       Binder b(g, s, [](const std::string&) { return false; });
                                       auto w = refine::bind_weighted(b);
                                       w.log_beta = v[1];
                                       const ad::Var m = refine::refine_mha(v[0], refine::bind_mha(b), 2);
                                       return testing::project(refine::refine_weighted(m, w));
                                     });
  CHECK(r.max_rel_error < 1e-5);
}

// ---- smoothing ----

TEST_CASE("smoothing matches the loop oracle in both modes") {
  Rng rng(10);
  const Tensor g = testing::random_tensor(rng, 12, 4);
  for (std::size_t k : {1u, 3u, 5u, 7u}) {
    for (post::SmoothingMode m : {post::SmoothingMode::kPaperLiteral, post::SmoothingMode::kKernelNormalized}) {
      const post::SmoothingConfig cfg{k, 1.3, m};
      const Tensor out = post::smooth_frames(g, cfg);
      const Tensor ref = testing::smooth_loop(g, k, 1.3, m == post::SmoothingMode::kKernelNormalized);
      CHECK(max_abs_diff(out, ref) < 1e-12);
      CHECK(max_abs_diff(matmul(post::smoothing_matrix(12, cfg), g), out) < 1e-12);
    }
  }
}

TEST_CASE("first frame is preserved and constants are fixed points") {
  Rng rng(11);
  const Tensor g = testing::random_tensor(rng, 9, 3);
  const Tensor out = post::smooth_frames(g, {});
  for (std::size_t c = 0; c < 3; ++c) CHECK(out.at(0, c) == g.at(0, c));
  const Tensor flat = Tensor::matrix(9, 3, 0.4);
  CHECK(post::smooth_frames(flat, {}) == flat);
  const Tensor one = testing::random_tensor(rng, 1, 3);
  CHECK(post::smooth_frames(one, {}) == one);
}

TEST_CASE("high frequencies are attenuated more") {
  const std::size_t t_len = 256;
  double prev = INFINITY;
  for (double freq : {0.01, 0.03, 0.06, 0.1, 0.15, 0.2}) {
    Tensor g({t_len, 1});
    for (std::size_t t = 0; t < t_len; ++t) g.at(t, 0) = std::sin(2.0 * std::numbers::pi * freq * t);
    const Tensor out = post::smooth_frames(g, {5, 1.0, post::SmoothingMode::kKernelNormalized});
    // Amplitude of the steady-state velocity response, away from the edges.
    double in_amp = 0.0, out_amp = 0.0;
    for (std::size_t t = 20; t + 20 < t_len; ++t) {
      in_amp = std::max(in_amp, std::abs(g.at(t, 0) - g.at(t - 1, 0)));
      out_amp = std::max(out_amp, std::abs(out.at(t, 0) - out.at(t - 1, 0)));
    }
    const double gain = out_amp / in_amp;
    CHECK(gain < prev);
    prev = gain;
  }
}

TEST_CASE("literal and normalized modes differ by the kernel mass on constant velocity") {
  const std::size_t t_len = 20;
  Tensor g({t_len, 2});
  for (std::size_t t = 0; t < t_len; ++t) {
    g.at(t, 0) = 0.3 * t;
    g.at(t, 1) = -0.1 * t + 1.0;
  }
  const post::SmoothingConfig paper{5, 1.0, post::SmoothingMode::kPaperLiteral};
  const post::SmoothingConfig norm{5, 1.0, post::SmoothingMode::kKernelNormalized};
  double mass = 0.0;
  for (int k = -2; k <= 2; ++k) mass += std::exp(-k * k / 2.0);
  const double ratio = mass / 5.0;
  const Tensor a = post::smooth_frames(g, paper), b = post::smooth_frames(g, norm);
  // Interior velocities (full kernel support) scale by the ratio exactly.
  for (std::size_t t = 3; t + 3 < t_len; ++t)
    for (std::size_t c = 0; c < 2; ++c) {
      const double va = a.at(t, c) - a.at(t - 1, c), vb = b.at(t, c) - b.at(t - 1, c);
      CHECK(std::abs(va - ratio * vb) < 1e-12);
    }
}

TEST_CASE("smoothing config validation") {
  CHECK_THROWS_AS(post::validate(post::SmoothingConfig{4, 1.0, post::SmoothingMode::kPaperLiteral}), ParameterError);
  CHECK_THROWS_AS(post::validate(post::SmoothingConfig{5, 0.0, post::SmoothingMode::kPaperLiteral}), ParameterError);
  CHECK(post::parse_smoothing_mode("paper") == post::SmoothingMode::kPaperLiteral);
  CHECK(post::parse_smoothing_mode("normalized") == post::SmoothingMode::kKernelNormalized);
  CHECK_THROWS(post::parse_smoothing_mode("fancy"));
  CHECK_THROWS_AS(post::smooth_frames(Tensor(), {}), ParameterError);
}
