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

#include "lblm/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "lblm/error.hpp"
#include "lblm/rng.hpp"
#include "lblm/simd/kernels.hpp"

namespace lblm::metrics {
namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Matrix to_eigen(const Tensor& t) {
  return Eigen::Map<const Matrix>(t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}

Tensor from_eigen(const Matrix& m) {
  Tensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  Eigen::Map<Matrix>(t.data(), m.rows(), m.cols()) = m;
  return t;
}

void require_nonempty(Corpus c, const char* op) {
  if (c.empty()) throw ParameterError(std::string(op) + ": empty corpus");
}

Tensor stack(Corpus corpus) { return concat_rows(corpus); }

}  // namespace

GaussianStats fit_stats(const Tensor& samples) {
  const std::size_t n = samples.empty() ? 0 : samples.rows();
  if (n < 2) throw ParameterError("fit_stats: need at least 2 samples, got " + std::to_string(n));
  const std::size_t d = samples.cols();
  GaussianStats s;
  s.n = n;
  s.mu = Tensor({d});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d; ++c) s.mu[c] += samples.at(i, c);
  for (std::size_t c = 0; c < d; ++c) s.mu[c] /= static_cast<double>(n);
  Tensor centred = samples;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d; ++c) centred.at(i, c) -= s.mu[c];
  s.sigma = Tensor({d, d});
  const Tensor ct = centred.transposed();
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      const double v = simd::dot(ct.data() + a * n, ct.data() + b * n, n) / static_cast<double>(n - 1);
      s.sigma.at(a, b) = v;
      s.sigma.at(b, a) = v;
    }
  }
  s.sigma.check_finite("fit_stats");
  return s;
}

Tensor sqrt_psd(const Tensor& s) {
  Matrix m = to_eigen(s);
  m = 0.5 * (m + m.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  if (eig.info() != Eigen::Success) throw NumericError("sqrt_psd: eigendecomposition failed");
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix& v = eig.eigenvectors();
  return from_eigen(v * root.asDiagonal() * v.transpose());
}

double frechet_distance(const GaussianStats& r, const GaussianStats& g) {
  const std::size_t d = r.mu.size();
  if (g.mu.size() != d || r.sigma.size() != d * d || g.sigma.size() != d * d) {
    throw ParameterError("frechet_distance: dimension mismatch (" + std::to_string(d) + " vs " +
                         std::to_string(g.mu.size()) + ")");
  }
  const double mean_term = simd::squared_distance(r.mu.data(), g.mu.data(), d);
  const Matrix root_r = to_eigen(sqrt_psd(r.sigma));
  Matrix inner = root_r * to_eigen(g.sigma) * root_r;
  inner = 0.5 * (inner + inner.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(inner, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericError("frechet_distance: eigendecomposition failed");
  const double tr_root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  double trace = 0.0;
  for (std::size_t i = 0; i < d; ++i) trace += r.sigma.at(i, i) + g.sigma.at(i, i);
  const double out = mean_term + trace - 2.0 * tr_root;
  if (!std::isfinite(out)) throw NumericError("frechet_distance produced a non-finite value");
  return std::max(0.0, out);
}

Tensor embed_corpus(Corpus corpus, const pose::PoseEmbeddingMatrix& embed) {
  return pose::embed_frames(stack(corpus), embed);
}

double fgd(Corpus real, Corpus gen, const pose::PoseEmbeddingMatrix& embed) {
  require_nonempty(real, "fgd");
  require_nonempty(gen, "fgd");
  return frechet_distance(fit_stats(embed_corpus(real, embed)), fit_stats(embed_corpus(gen, embed)));
}

FeatureNet FeatureNet::create(std::uint64_t seed, std::size_t pose_dim, std::size_t features, std::size_t width) {
  if (width == 0 || width % 2 == 0) throw ParameterError("FeatureNet: window width must be odd");
  FeatureNet net;
  net.seed = seed;
  net.width = width;
  Rng rng(seed);
  Rng wr = rng.split(1), br = rng.split(2);
  net.w = scale(gaussian_sample(wr, {features, width * pose_dim}), 1.0 / std::sqrt(static_cast<double>(pose_dim)));
  net.bias = scale(gaussian_sample(br, {features}), 0.1);
  return net;
}

Tensor FeatureNet::features(const Tensor& frames) const {
  const std::size_t t_len = frames.rows(), d = frames.cols();
  if (w.cols() != width * d) throw DimensionError("FeatureNet: pose width mismatch");
  const std::size_t half = width / 2;
  const std::size_t f = w.rows();
  Tensor out({t_len, f});
  std::vector<double> window(width * d);
  for (std::size_t t = 0; t < t_len; ++t) {
    std::fill(window.begin(), window.end(), 0.0);
    for (std::size_t k = 0; k < width; ++k) {
      const long s = static_cast<long>(t + k) - static_cast<long>(half);
      if (s < 0 || s >= static_cast<long>(t_len)) continue;
      std::copy_n(frames.data() + s * d, d, window.data() + k * d);
    }
    for (std::size_t j = 0; j < f; ++j) {
      out.at(t, j) = std::tanh(simd::dot(w.data() + j * w.cols(), window.data(), window.size()) + bias[j]);
    }
  }
  return out;
}

double fid(Corpus real, Corpus gen, const FeatureNet& net) {
  require_nonempty(real, "fid");
  require_nonempty(gen, "fid");
  auto feats = [&](Corpus c) {
    std::vector<Tensor> parts;
    for (const Tensor& s : c) parts.push_back(net.features(s));
    return concat_rows(parts);
  };
  return frechet_distance(fit_stats(feats(real)), fit_stats(feats(gen)));
}

double apd(const Tensor& poses) {
  const std::size_t n = poses.empty() ? 0 : poses.rows();
  if (n < 2) throw ParameterError("apd: need at least 2 poses, got " + std::to_string(n));
  const std::size_t d = poses.cols();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      acc += std::sqrt(simd::squared_distance(poses.data() + i * d, poses.data() + j * d, d));
  return acc / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

double apd(Corpus gen) {
  require_nonempty(gen, "apd");
  return apd(stack(gen));
}

double grs(Corpus gen, const disc::Discriminator* d) {
  if (d == nullptr) throw ConfigError("grs: no trained discriminator available");
  require_nonempty(gen, "grs");
  double acc = 0.0;
  for (const Tensor& s : gen) acc += d->probability(s);
  return acc / static_cast<double>(gen.size());
}

GdiMode parse_gdi_mode(const std::string& name) {
  if (name == "raw") return GdiMode::kRaw;
  if (name == "normalized") return GdiMode::kNormalized;
  throw ConfigError("gdi mode must be raw or normalized, got '" + name + "'");
}

double gdi_from_embeddings(const Tensor& pooled, GdiMode mode) {
  const std::size_t n = pooled.empty() ? 0 : pooled.rows();
  if (n < 2) throw ParameterError("gdi: need at least 2 sequences, got " + std::to_string(n));
  Tensor e = pooled;
  const std::size_t d = e.cols();
  if (mode == GdiMode::kNormalized) {
    for (std::size_t i = 0; i < n; ++i) {
      const double norm = std::sqrt(simd::dot(e.data() + i * d, e.data() + i * d, d));
      if (norm > 0.0)
        for (std::size_t c = 0; c < d; ++c) e.at(i, c) /= norm;
    }
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      acc += std::sqrt(simd::squared_distance(e.data() + i * d, e.data() + j * d, d));
  double out = acc / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
  if (mode == GdiMode::kNormalized) out = std::clamp(out / 2.0, 0.0, 1.0);
  return out;
}

double gdi(Corpus gen, const pose::PoseEmbeddingMatrix& embed, GdiMode mode) {
  if (gen.size() < 2) throw ParameterError("gdi: need at least 2 sequences, got " + std::to_string(gen.size()));
  const std::size_t d = embed.weights.cols();
  Tensor pooled({gen.size(), d});
  for (std::size_t i = 0; i < gen.size(); ++i) {
    const Tensor e = pose::embed_frames(gen[i], embed);
    for (std::size_t t = 0; t < e.rows(); ++t)
      for (std::size_t c = 0; c < d; ++c) pooled.at(i, c) += e.at(t, c);
    for (std::size_t c = 0; c < d; ++c) pooled.at(i, c) /= static_cast<double>(e.rows());
  }
  return gdi_from_embeddings(pooled, mode);
}

}  // namespace lblm::metrics
