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

#include "lblm/params.hpp"

#include "lblm/error.hpp"

namespace lblm {

void ParamStore::set(const std::string& name, Tensor value) { tensors_[name] = std::move(value); }

const Tensor& ParamStore::get(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw ConfigError("missing parameter '" + name + "'");
  return it->second;
}

Tensor& ParamStore::get_mut(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw ConfigError("missing parameter '" + name + "'");
  return it->second;
}

std::vector<std::string> ParamStore::names_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [name, _] : tensors_)
    if (name.compare(0, prefix.size(), prefix) == 0) out.push_back(name);
  return out;
}

std::uint64_t name_hash(const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

void init_normal(ParamStore& store, const std::string& name, Shape shape, double stddev, const Rng& master) {
  Rng rng = master.split(name_hash(name));
  Tensor t = gaussian_sample(rng, shape);
  for (double& v : t.values()) v *= stddev;
  store.set(name, std::move(t));
}

void init_constant(ParamStore& store, const std::string& name, Shape shape, double value) {
  store.set(name, Tensor(std::move(shape), value));
}

Binder::Binder(ad::Graph& graph, const ParamStore& store, Predicate trainable)
    : graph_(graph), store_(store), trainable_(std::move(trainable)) {}

ad::Var Binder::operator()(const std::string& name) {
  if (auto it = cache_.find(name); it != cache_.end()) return it->second;
  const Tensor& t = store_.get(name);
  const bool train = trainable_ && trainable_(name);
  ad::Var v = train ? graph_.parameter(t) : graph_.constant(t);
  cache_.emplace(name, v);
  if (train) leaves_.emplace(name, v);
  return v;
}

std::map<std::string, Tensor> Binder::gradients() const {
  std::map<std::string, Tensor> out;
  for (const auto& [name, v] : leaves_) out.emplace(name, v.grad().reshaped(store_.get(name).shape()));
  return out;
}

Binder::Predicate prefix_predicate(std::string prefix) {
  return [p = std::move(prefix)](const std::string& name) { return name.compare(0, p.size(), p) == 0; };
}

}  // namespace lblm
