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

// Loop-level reference implementations. These deliberately avoid the library's
// kernels so they can serve as oracles in tests.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "lblm/encoder.hpp"
#include "lblm/tensor.hpp"

namespace lblm::testing {

// Frechet distance for independent coordinates: sum over dims of
// (m1 - m2)^2 + v1 + v2 - 2 sqrt(v1 v2).
inline double frechet_diagonal(const std::vector<double>& m1, const std::vector<double>& v1,
                               const std::vector<double>& m2, const std::vector<double>& v2) {
  double s = 0.0;
  for (std::size_t i = 0; i < m1.size(); ++i) {
    const double d = m1[i] - m2[i];
    s += d * d + v1[i] + v2[i] - 2.0 * std::sqrt(v1[i] * v2[i]);
  }
  return s;
}

inline double euclid(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline double apd_loop(const Tensor& x) {
  const std::size_t n = x.rows(), d = x.cols();
  double s = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j, ++pairs) s += euclid(x.data() + i * d, x.data() + j * d, d);
  return pairs ? s / static_cast<double>(pairs) : 0.0;
}

inline double log_sigmoid_loop(double x) {
  // log(1 / (1 + e^-x)) written in the two stable branches.
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

inline double clamp_logit(double x) { return std::clamp(x, -30.0, 30.0); }

inline Tensor layer_norm_loop(const Tensor& x, const Tensor& gain, const Tensor& bias) {
  Tensor out = x;
  const std::size_t n = x.cols();
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double mu = 0.0, var = 0.0;
    for (std::size_t j = 0; j < n; ++j) mu += x.at(r, j);
    mu /= n;
    for (std::size_t j = 0; j < n; ++j) var += (x.at(r, j) - mu) * (x.at(r, j) - mu);
    var /= n;
    for (std::size_t j = 0; j < n; ++j) out.at(r, j) = (x.at(r, j) - mu) / std::sqrt(var + 1e-5) * gain[j] + bias[j];
  }
  return out;
}

// y = x Wᵀ + b with loops.
inline Tensor linear_loop(const Tensor& x, const Tensor& w, const Tensor* b) {
  Tensor y({x.rows(), w.rows()});
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t o = 0; o < w.rows(); ++o) {
      double s = b ? (*b)[o] : 0.0;
      for (std::size_t i = 0; i < x.cols(); ++i) s += x.at(r, i) * w.at(o, i);
      y.at(r, o) = s;
    }
  return y;
}

inline double gelu_ref(double v) {
  return 0.5 * v * (1.0 + std::tanh(std::sqrt(2.0 / std::numbers::pi) * (v + 0.044715 * v * v * v)));
}

// Whole sequence in one pass. Row i (in segment s_i = i / L_s) attends to
// every row of segments s_i - 1 and s_i at the same layer, with relative bias
// indexed by clip(i - j). With a single carried memory segment this is the
// monolithic equivalent of chunked recurrent encoding.
inline Tensor monolithic_masked_encode(const Tensor& x, const encoder::EncoderWeights<Tensor>& w,
                                       const encoder::EncoderConfig& cfg, bool with_memory = true) {
  const std::size_t n = x.rows(), d = cfg.d, ls = cfg.segment_len, dh = d / cfg.heads;
  auto visible = [&](std::size_t i, std::size_t j) {
    const std::size_t si = i / ls, sj = j / ls;
    return sj == si || (with_memory && sj + 1 == si);
  };
  Tensor h = x;
  for (const auto& lw : w.layers) {
    const Tensor q = linear_loop(h, lw.w_q, nullptr), k = linear_loop(h, lw.w_k, nullptr),
                 v = linear_loop(h, lw.w_v, nullptr);
    Tensor cat({n, cfg.heads * dh});
    for (std::size_t hd = 0; hd < cfg.heads; ++hd) {
      const double* table = lw.rel_bias.data() + hd * (2 * ls + 1);
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> s(n, -INFINITY);
        double mx = -INFINITY;
        for (std::size_t j = 0; j < n; ++j) {
          if (!visible(i, j)) continue;
          double dot = 0.0;
          for (std::size_t c = 0; c < dh; ++c) dot += q.at(i, hd * dh + c) * k.at(j, hd * dh + c);
          const long off = std::clamp(static_cast<long>(i) - static_cast<long>(j), -static_cast<long>(ls),
                                      static_cast<long>(ls));
          s[j] = dot / std::sqrt(static_cast<double>(dh)) + table[off + static_cast<long>(ls)];
          mx = std::max(mx, s[j]);
        }
        double z = 0.0;
        for (std::size_t j = 0; j < n; ++j) z += visible(i, j) ? std::exp(s[j] - mx) : 0.0;
        for (std::size_t c = 0; c < dh; ++c) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j)
            if (visible(i, j)) acc += std::exp(s[j] - mx) / z * v.at(j, hd * dh + c);
          cat.at(i, hd * dh + c) = acc;
        }
      }
    }
    const Tensor attn = linear_loop(cat, lw.w_o, &lw.b_o);
    Tensor r1 = h;
    for (std::size_t i = 0; i < r1.size(); ++i) r1[i] += attn[i];
    const Tensor h1 = layer_norm_loop(r1, lw.ln1_gain, lw.ln1_bias);
    Tensor hid = linear_loop(h1, lw.w_ff1, &lw.b_ff1);
    for (double& val : hid.values()) val = gelu_ref(val);
    const Tensor ff = linear_loop(hid, lw.w_ff2, &lw.b_ff2);
    Tensor r2 = h1;
    for (std::size_t i = 0; i < r2.size(); ++i) r2[i] += ff[i];
    h = layer_norm_loop(r2, lw.ln2_gain, lw.ln2_bias);
  }
  return h;
}

// Velocity-domain smoothing written directly from its definition.
inline Tensor smooth_loop(const Tensor& g, std::size_t k, double sigma, bool normalize_by_sum) {
  const std::size_t t_len = g.rows(), d = g.cols();
  const long half = static_cast<long>(k / 2);
  std::vector<double> w;
  double total = 0.0;
  for (long o = -half; o <= half; ++o) {
    w.push_back(std::exp(-static_cast<double>(o * o) / (2.0 * sigma * sigma)));
    total += w.back();
  }
  const double norm = normalize_by_sum ? total : static_cast<double>(k);
  Tensor out = g;
  if (t_len == 0) return out;
  // v_0 = 0, v_t = g_t - g_{t-1}.
  auto vel = [&](long t, std::size_t c) { return t <= 0 || t >= static_cast<long>(t_len) ? 0.0 : g.at(t, c) - g.at(t - 1, c); };
  for (std::size_t c = 0; c < d; ++c) {
    double pos = g.at(0, c);
    for (std::size_t t = 1; t < t_len; ++t) {
      double v = 0.0;
      for (long o = -half; o <= half; ++o) v += w[o + half] * vel(static_cast<long>(t) + o, c);
      pos += v / norm;
      out.at(t, c) = pos;
    }
  }
  return out;
}

}  // namespace lblm::testing
