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

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "lblm/autodiff.hpp"
#include "lblm/rng.hpp"
#include "lblm/tensor.hpp"

namespace lblm {

// Named parameter tensors. Names are dotted paths ("encoder.layer0.attn.w_q")
// and double as checkpoint file stems, so iteration order is lexicographic
// and stable.
class ParamStore {
 public:
  void set(const std::string& name, Tensor value);
  const Tensor& get(const std::string& name) const;
  Tensor& get_mut(const std::string& name);
  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }
  const std::map<std::string, Tensor>& all() const { return tensors_; }
  std::vector<std::string> names_with_prefix(const std::string& prefix) const;
  std::size_t size() const { return tensors_.size(); }

  friend bool operator==(const ParamStore& a, const ParamStore& b) { return a.tensors_ == b.tensors_; }

 private:
  std::map<std::string, Tensor> tensors_;
};

// Normal(0, stddev) init drawn from a stream keyed by the parameter name, so
// adding or removing other parameters never perturbs this one.
void init_normal(ParamStore& store, const std::string& name, Shape shape, double stddev, const Rng& master);
void init_constant(ParamStore& store, const std::string& name, Shape shape, double value);
std::uint64_t name_hash(const std::string& name);

// Resolves parameter names to graph variables for one forward pass. Names for
// which `trainable` returns true become gradient leaves; the rest are constants.
class Binder {
 public:
  using Predicate = std::function<bool(const std::string&)>;

  Binder(ad::Graph& graph, const ParamStore& store, Predicate trainable = nullptr);

  ad::Var operator()(const std::string& name);
  ad::Graph& graph() { return graph_; }
  const ParamStore& store() const { return store_; }
  // Trainable leaves bound so far.
  const std::map<std::string, ad::Var>& leaves() const { return leaves_; }
  // Gradients of every bound trainable leaf after graph().backward().
  std::map<std::string, Tensor> gradients() const;

 private:
  ad::Graph& graph_;
  const ParamStore& store_;
  Predicate trainable_;
  std::map<std::string, ad::Var> cache_;
  std::map<std::string, ad::Var> leaves_;
};

Binder::Predicate prefix_predicate(std::string prefix);

}  // namespace lblm
