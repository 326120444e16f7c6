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
#include <limits>
#include <sstream>
#include <vector>

#include "lblm/autodiff.hpp"
#include "lblm/error.hpp"
#include "lblm/parallel.hpp"
#include "lblm/rng.hpp"
#include "lblm/simd/kernels.hpp"
#include "lblm/tensor.hpp"
#include "lblm/tensor_io.hpp"
#include "support/gradcheck.hpp"

using namespace lblm;

TEST_CASE("matmul against hand values") {
  const Tensor a = Tensor::from_rows({{1, 2}, {3, 4}});
  const Tensor b = Tensor::from_rows({{5, 6}, {7, 8}});
  CHECK(matmul(a, b) == Tensor::from_rows({{19, 22}, {43, 50}}));
  CHECK(matmul_nt(a, b) == Tensor::from_rows({{17, 23}, {39, 53}}));
  CHECK_THROWS_AS(matmul(a, Tensor::matrix(3, 2)), DimensionError);
}

TEST_CASE("softmax sharpness") {
  const Tensor x = Tensor::from_rows({{0.0, std::log(3.0)}});
  const Tensor s1 = softmax(x, 1.0);
  CHECK(s1[0] == doctest::Approx(0.25).epsilon(1e-14));
  const Tensor s2 = softmax(x, 2.0);
  CHECK(s2[1] == doctest::Approx(0.9).epsilon(1e-14));
  CHECK_THROWS_AS(softmax(x, 0.0), ParameterError);
}

TEST_CASE("non-finite values name the op") {
  Tensor t = Tensor::matrix(1, 2);
  t[1] = std::numeric_limits<double>::quiet_NaN();
  try {
    t.check_finite("widget");
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("widget") != std::string::npos);
  }
}

TEST_CASE("rng is reproducible and splits are independent streams") {
  Rng a(7), b(7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c = Rng(7).split(1), d = Rng(7).split(2);
  CHECK(c.next_u64() != d.next_u64());
  CHECK(Rng(7).split(3).key() == Rng(7).split(3).key());

  Rng r(11);
  for (int i = 0; i < 10; ++i) r.next_u64();
  Rng restored = Rng::restore(r.key(), r.counter());
  Rng copy = r;
  CHECK(restored.next_u64() == copy.next_u64());
}

TEST_CASE("normal draws have unit moments") {
  Rng r(5);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = r.normal();
    s += v;
    s2 += v * v;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
}

TEST_CASE("simd variants match the scalar reference") {
  const simd::KernelTable& ref = simd::scalar_kernels();
  std::vector<const simd::KernelTable*> variants;
#if defined(LBLM_HAVE_AVX2)
  if (simd::isa_supported(simd::Isa::kAvx2)) variants.push_back(&simd::avx2_kernels());
#endif
#if defined(LBLM_HAVE_NEON)
  if (simd::isa_supported(simd::Isa::kNeon)) variants.push_back(&simd::neon_kernels());
#endif
  Rng rng(3);
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 13u, 64u, 1001u}) {
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.normal();
      b[i] = rng.normal();
    }
    for (const simd::KernelTable* k : variants) {
      const double tol = 1e-12 * std::max<std::size_t>(1, n);
      CHECK(std::abs(k->dot(a.data(), b.data(), n) - ref.dot(a.data(), b.data(), n)) <= tol);
      CHECK(std::abs(k->squared_distance(a.data(), b.data(), n) - ref.squared_distance(a.data(), b.data(), n)) <=
            tol);
      std::vector<double> y1 = b, y2 = b;
      ref.axpy(0.37, a.data(), y1.data(), n);
      k->axpy(0.37, a.data(), y2.data(), n);
      CHECK(y1 == y2);
      std::vector<double> o1(n), o2(n);
      ref.lerp(a.data(), b.data(), 0.125, o1.data(), n);
      k->lerp(a.data(), b.data(), 0.125, o2.data(), n);
      CHECK(o1 == o2);
    }
  }
}

TEST_CASE("isa selection") {
  const simd::Isa before = simd::active_isa();
  simd::set_isa(simd::Isa::kScalar);
  CHECK(simd::active_isa() == simd::Isa::kScalar);
  CHECK(simd::isa_name(simd::Isa::kScalar) == "scalar");
  simd::set_isa(before);
}

TEST_CASE("tensor serialization round-trips bytes") {
  Rng rng(1);
  const Tensor t = testing::random_tensor(rng, 3, 5);
  const std::string bytes = encode_tensor(t);
  const Tensor back = decode_tensor(bytes);
  CHECK(back == t);
  CHECK(encode_tensor(back) == bytes);
  CHECK_THROWS_AS(decode_tensor("LBT0garbage"), IoError);
}

TEST_CASE("parallel_for covers every index once and rethrows") {
  std::vector<int> hits(97, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 5) throw ParameterError("boom");
                  }),
                  ParameterError);
}

TEST_CASE("finite-difference check of every op") {
  for (const auto& c : testing::op_cases()) {
    const testing::GradCheck r = testing::grad_check(c.name, c.inputs, c.fn);
    INFO(c.name);
    CHECK(r.max_rel_error < 1e-5);
  }
}

TEST_CASE("gradients accumulate over shared uses") {
  ad::Graph g;
  const ad::Var x = g.parameter(Tensor::scalar(3.0));
  g.backward(ad::add(ad::mul(x, x), x));
  CHECK(x.grad().item() == doctest::Approx(7.0));
}

TEST_CASE("detach stops gradients") {
  ad::Graph g;
  const ad::Var x = g.parameter(Tensor::scalar(2.0));
  g.backward(ad::mul(ad::detach(x), x));
  CHECK(x.grad().item() == doctest::Approx(2.0));
}

TEST_CASE("backward requires a scalar") {
  ad::Graph g;
  const ad::Var x = g.parameter(Tensor::matrix(2, 2, 1.0));
  CHECK_THROWS(g.backward(x));
}
