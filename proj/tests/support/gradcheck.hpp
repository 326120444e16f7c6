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

// Central finite-difference gradient checks for the tape.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "lblm/autodiff.hpp"
#include "lblm/rng.hpp"

namespace lblm::testing {

struct GradCheck {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t entries = 0;
};

// Builds a scalar from the bound inputs; called with a fresh graph each time.
using ScalarFn = std::function<ad::Var(ad::Graph&, const std::vector<ad::Var>&)>;

// Error per entry is |analytic - numeric| / max(1, |analytic|, |numeric|).
inline GradCheck grad_check(const std::string& name, const std::vector<Tensor>& inputs, const ScalarFn& fn,
                            double h = 1e-6) {
  std::vector<Tensor> grads;
  {
    ad::Graph g;
    std::vector<ad::Var> vars;
    for (const Tensor& t : inputs) vars.push_back(g.parameter(t));
    const ad::Var loss = fn(g, vars);
    g.backward(loss);
    for (const ad::Var& v : vars) grads.push_back(v.grad());
  }
  auto eval = [&](const std::vector<Tensor>& xs) {
    ad::Graph g;
    std::vector<ad::Var> vars;
    for (const Tensor& t : xs) vars.push_back(g.constant(t));
    return fn(g, vars).value().item();
  };
  GradCheck out{name, 0.0, 0};
  std::vector<Tensor> xs = inputs;
  for (std::size_t a = 0; a < xs.size(); ++a) {
    for (std::size_t i = 0; i < xs[a].size(); ++i) {
      const double x0 = xs[a][i];
      xs[a][i] = x0 + h;
      const double fp = eval(xs);
      xs[a][i] = x0 - h;
      const double fm = eval(xs);
      xs[a][i] = x0;
      const double numeric = (fp - fm) / (2.0 * h);
      const double analytic = grads[a][i];
      const double err =
          std::abs(analytic - numeric) / std::max({1.0, std::abs(analytic), std::abs(numeric)});
      out.max_rel_error = std::max(out.max_rel_error, err);
      ++out.entries;
    }
  }
  return out;
}

inline Tensor random_tensor(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
  Tensor t({rows, cols});
  for (double& v : t.values()) v = scale * rng.normal();
  return t;
}

// Reduces a matrix output to a scalar through fixed random weights so every
// output entry contributes.
inline ad::Var project(ad::Var y, std::uint64_t seed = 99) {
  Rng rng(seed);
  const Tensor w = random_tensor(rng, y.rows(), y.cols());
  return ad::sum(ad::mul(y, y.graph().constant(w)));
}

// Every registered op, each wrapped into a scalar function with its inputs.
struct OpCase {
  std::string name;
  std::vector<Tensor> inputs;
  ScalarFn fn;
};

inline std::vector<OpCase> op_cases() {
  using ad::Var;
  Rng rng(2024);
  auto R = [&](std::size_t r, std::size_t c, double s = 1.0) { return random_tensor(rng, r, c, s); };
  // Inputs kept away from clamp kinks.
  Tensor clamp_in = R(3, 4);
  for (double& v : clamp_in.values())
    if (std::abs(std::abs(v) - 0.5) < 0.05) v += 0.2;
  std::vector<OpCase> c;
  auto add_case = [&](std::string name, std::vector<Tensor> in, ScalarFn fn) {
    c.push_back({std::move(name), std::move(in), std::move(fn)});
  };
  add_case("matmul", {R(3, 4), R(4, 2)}, [](ad::Graph&, const std::vector<Var>& v) {
    return project(ad::matmul(v[0], v[1]));
  });
  add_case("matmul_nt", {R(3, 4), R(5, 4)}, [](ad::Graph&, const std::vector<Var>& v) {
    return project(ad::matmul_nt(v[0], v[1]));
  });
  add_case("transpose", {R(3, 4)}, [](ad::Graph&, const std::vector<Var>& v) { return project(ad::transpose(v[0])); });
  add_case("add", {R(3, 4), R(3, 4)}, [](ad::Graph&, const std::vector<Var>& v) { return project(ad::add(v[0], v[1])); });
  add_case("sub", {R(3, 4), R(3, 4)}, [](ad::Graph&, const std::vector<Var>& v) { return project(ad::sub(v[0], v[1])); });
  add_case("mul", {R(3, 4), R(3, 4)}, [](ad::Graph&, const std::vector<Var>& v) { return project(ad::mul(v[0], v[1])); });
  add_case("scale", {R(3, 4)}, [](ad::Graph&, const std::vector<Var>& v) { return project(ad::scale(v[0], -1.7)); });
  add_case("add_scalar", {R(3, 4)}, [](ad::Graph&, const std::vector<Var>& v) {
    return project(ad::add_scalar(v[0], 0.3));
  });
  add_case("mul_scalar", {R(3, 4), R(1, 1)}, [](ad::Graph&, const std::vector<Var>& v) {
    return project(ad::mul_scalar(v[0], v[1]));
  });
  add_case("add_row", {R(3, 4), R(1, 4)}, [](ad::Graph&, const std::vector<Var>& v) {
    return project(ad::add_row(v[0], v[1]));
  });
  add_case("linear", {R(3, 4), R(2, 4), R(1, 2)}, [](ad::Graph&, const std::vector<Var>& v) {
    return project(ad::linear(v[0], v[1], v[2]));
  });
  add_case("linear_nobias", {R(3, 4), R(2, 4)}, [](ad::Graph&, const std::vector<Var>& v) {
    return project(ad::linear(v[0], v[1]));
  });
  add_case("gelu", {R(3, 4, 2.0)}, [](ad::Graph&, const std::vector<Var>& v) { return project(ad::gelu(v[0])); });
  add_case("tanh", {R(3, 4)}, [](ad::Graph&, const std::vector<Var>& v) { return project(ad::tanh(v[0])); });
  add_case("sigmoid", {R(3, 4, 2.0)}, [](ad::Graph&, const std::vector<Var>& v) { return project(ad::sigmoid(v[0])); });
  add_case("exp", {R(3, 4, 0.5)}, [](ad::Graph&, const std::vector<Var>& v) { return project(ad::exp(v[0])); });
  add_case("clamp", {clamp_in}, [](ad::Graph&, const std::vector<Var>& v) {
    return project(ad::clamp(v[0], -0.5, 0.5));
  });
  add_case("log_sigmoid", {R(3, 4, 3.0)}, [](ad::Graph&, const std::vector<Var>& v) {
    return project(ad::log_sigmoid(v[0]));
  });
  add_case("softmax_rows", {R(3, 5)}, [](ad::Graph&, const std::vector<Var>& v) {
    return project(ad::softmax_rows(v[0], 1.6));
  });
  add_case("layer_norm_rows", {R(3, 6), R(1, 6), R(1, 6)}, [](ad::Graph&, const std::vector<Var>& v) {
    return project(ad::layer_norm_rows(v[0], v[1], v[2]));
  });
  add_case("normalize_groups", {R(2, 9)}, [](ad::Graph&, const std::vector<Var>& v) {
    return project(ad::normalize_groups(v[0], 3));
  });
  add_case("concat_rows", {R(2, 3), R(1, 3)}, [](ad::Graph&, const std::vector<Var>& v) {
    const Var parts[] = {v[0], v[1]};
    return project(ad::concat_rows(parts));
  });
  add_case("concat_cols", {R(3, 2), R(3, 1)}, [](ad::Graph&, const std::vector<Var>& v) {
    const Var parts[] = {v[0], v[1]};
    return project(ad::concat_cols(parts));
  });
  add_case("slice_rows", {R(4, 3)}, [](ad::Graph&, const std::vector<Var>& v) {
    return project(ad::slice_rows(v[0], 1, 3));
  });
  add_case("slice_cols", {R(3, 5)}, [](ad::Graph&, const std::vector<Var>& v) {
    return project(ad::slice_cols(v[0], 2, 5));
  });
  add_case("element", {R(3, 4)}, [](ad::Graph&, const std::vector<Var>& v) {
    return ad::scale(ad::element(v[0], 7), 2.5);
  });
  add_case("sum", {R(3, 4)}, [](ad::Graph&, const std::vector<Var>& v) { return ad::sum(ad::mul(v[0], v[0])); });
  add_case("mean", {R(3, 4)}, [](ad::Graph&, const std::vector<Var>& v) { return ad::mean(ad::mul(v[0], v[0])); });
  add_case("mean_rows", {R(3, 4)}, [](ad::Graph&, const std::vector<Var>& v) { return project(ad::mean_rows(v[0])); });
  add_case("relative_bias", {R(2, 7)}, [](ad::Graph&, const std::vector<Var>& v) {
    return project(ad::relative_bias(v[0], 1, 2, 3, 5, 3));
  });
  add_case("detach", {R(3, 4)}, [](ad::Graph&, const std::vector<Var>& v) {
    // The detached branch contributes value but no gradient.
    return ad::add(project(ad::tanh(v[0])), ad::scale(ad::sum(ad::detach(v[0])), 0.0));
  });
  return c;
}

}  // namespace lblm::testing
