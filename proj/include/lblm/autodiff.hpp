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
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "lblm/tensor.hpp"

// Tape-based reverse-mode differentiation over 2-D tensors. A Graph owns every
// node created during one forward pass; nodes are appended in evaluation order
// so the tape is topologically sorted by construction. Only first-order
// gradients are supported.

namespace lblm::ad {

class Graph;

class Var {
 public:
  Var() = default;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  bool valid() const { return graph_ != nullptr; }
  Graph& graph() const { return *graph_; }
  std::size_t id() const { return id_; }

  const Tensor& value() const;
  // Gradient after backward(); a zero tensor of value's shape when the node
  // received no contribution.
  Tensor grad() const;
  bool requires_grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

using BackwardFn = std::function<void(Graph&, std::size_t self)>;

class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  // Leaf that accumulates a gradient.
  Var parameter(Tensor value);

  // Seeds d(loss)/d(loss) = 1 and accumulates gradients into every node that
  // requires them. loss must be a single element.
  void backward(Var loss);

  // Appends a node. `fn` is dropped when no parent requires a gradient.
  Var record(const char* op, Tensor value, std::initializer_list<Var> parents, BackwardFn fn);
  Var record(const char* op, Tensor value, std::span<const Var> parents, BackwardFn fn);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  bool has_grad(std::size_t id) const { return !nodes_[id].grad.empty() || nodes_[id].value.empty(); }
  const Tensor& grad_of(std::size_t id) const { return nodes_[id].grad; }
  // Lazily allocated zero-initialised gradient buffer.
  Tensor& grad_buffer(std::size_t id);
  const char* op_name(std::size_t id) const { return nodes_[id].op; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    const char* op = "";
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

Var matmul(Var a, Var b);
// a · bᵀ; this is the Linear layer convention with W stored as [out x in].
Var matmul_nt(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
// x * s for a 1x1 variable s.
Var mul_scalar(Var x, Var s);
// x + bias broadcast over rows; bias has x.cols() elements.
Var add_row(Var x, Var bias);
// xᵀ-free linear map x·Wᵀ + b.
Var linear(Var x, Var w, Var b);
Var linear(Var x, Var w);

Var gelu(Var x);
Var tanh(Var x);
Var sigmoid(Var x);
Var exp(Var x);
Var clamp(Var x, double lo, double hi);
// log(sigmoid(x)), evaluated stably.
Var log_sigmoid(Var x);
// Row-wise softmax of beta * x.
Var softmax_rows(Var x, double beta = 1.0);
Var layer_norm_rows(Var x, Var gain, Var bias, double eps = 1e-5);

// Each consecutive run of `group` columns scaled to unit length:
// u = b / sqrt(|b|^2 + eps).
Var normalize_groups(Var x, std::size_t group, double eps = 1e-8);

Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
Var slice_rows(Var x, std::size_t begin, std::size_t end);
Var slice_cols(Var x, std::size_t begin, std::size_t end);
Var element(Var x, std::size_t index);

Var sum(Var x);
Var mean(Var x);
// Column means, shape 1 x cols.
Var mean_rows(Var x);

// Offset-indexed bias: out[i][j] = table[head][clip(q_pos0 + i - j) + clip_at]
// where clip() saturates offsets to [-clip_at, clip_at]. table has shape
// heads x (2*clip_at + 1).
Var relative_bias(Var table, std::size_t head, std::size_t q_pos0, std::size_t n_q, std::size_t n_k,
                  std::size_t clip_at);

// Value copy with no gradient path back to x.
Var detach(Var x);

}  // namespace lblm::ad
