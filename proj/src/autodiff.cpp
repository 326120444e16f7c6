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

#include "lblm/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lblm/error.hpp"
#include "lblm/simd/kernels.hpp"

namespace lblm::ad {
namespace {

void accumulate(Tensor& dst, const Tensor& src) { simd::axpy(1.0, src.data(), dst.data(), src.size()); }

void same_graph(Var a, Var b, const char* op) {
  if (&a.graph() != &b.graph()) throw ContractError(std::string(op) + ": operands belong to different graphs");
}

void same_shape(Var a, Var b, const char* op) {
  if (a.value().shape() != b.value().shape()) {
    throw DimensionError(std::string(op) + ": " + shape_str(a.value().shape()) + " vs " +
                         shape_str(b.value().shape()));
  }
}

Tensor as_matrix(Tensor t) {
  if (t.rank() != 2) return t.reshaped({t.rows(), t.cols()});
  return t;
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)

}  // namespace

const Tensor& Var::value() const { return graph_->value(id_); }

Tensor Var::grad() const {
  const Tensor& g = graph_->grad_of(id_);
  if (g.empty()) return Tensor(value().shape());
  return g;
}

bool Var::requires_grad() const { return graph_->requires_grad(id_); }

Var Graph::constant(Tensor value) {
  value = as_matrix(std::move(value));
  value.check_finite("constant");
  nodes_.push_back(Node{std::move(value), {}, false, "constant", {}});
  return Var(this, nodes_.size() - 1);
}

Var Graph::parameter(Tensor value) {
  value = as_matrix(std::move(value));
  value.check_finite("parameter");
  nodes_.push_back(Node{std::move(value), {}, true, "parameter", {}});
  return Var(this, nodes_.size() - 1);
}

Var Graph::record(const char* op, Tensor value, std::initializer_list<Var> parents, BackwardFn fn) {
  return record(op, std::move(value), std::span<const Var>(parents.begin(), parents.size()), std::move(fn));
}

Var Graph::record(const char* op, Tensor value, std::span<const Var> parents, BackwardFn fn) {
  value.check_finite(op);
  bool needs = false;
  for (const Var& p : parents) {
    if (&p.graph() != this) throw ContractError(std::string(op) + ": operand from another graph");
    needs = needs || p.requires_grad();
  }
  nodes_.push_back(Node{as_matrix(std::move(value)), {}, needs, op, needs ? std::move(fn) : BackwardFn{}});
  return Var(this, nodes_.size() - 1);
}

Tensor& Graph::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty() && !n.value.empty()) n.grad = Tensor(n.value.shape());
  return n.grad;
}

void Graph::backward(Var loss) {
  if (&loss.graph() != this) throw ContractError("backward: loss from another graph");
  if (loss.value().size() != 1) {
    throw ContractError("backward: loss must be scalar, got " + shape_str(loss.value().shape()));
  }
  for (Node& n : nodes_) n.grad = Tensor();
  if (!loss.requires_grad()) return;
  grad_buffer(loss.id())[0] = 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.empty()) continue;
    n.backward(*this, i);
    n.grad.check_finite(n.op);
  }
}

Var matmul(Var a, Var b) {
  same_graph(a, b, "matmul");
  const std::size_t ia = a.id(), ib = b.id();
  return a.graph().record("matmul", lblm::matmul(a.value(), b.value()), {a, b}, [ia, ib](Graph& g, std::size_t self) {
    const Tensor& G = g.grad_of(self);
    if (g.requires_grad(ia)) accumulate(g.grad_buffer(ia), lblm::matmul_nt(G, g.value(ib)));
    if (g.requires_grad(ib)) accumulate(g.grad_buffer(ib), lblm::matmul(g.value(ia).transposed(), G));
  });
}

Var matmul_nt(Var a, Var b) {
  same_graph(a, b, "matmul_nt");
  const std::size_t ia = a.id(), ib = b.id();
  return a.graph().record("matmul_nt", lblm::matmul_nt(a.value(), b.value()), {a, b},
                          [ia, ib](Graph& g, std::size_t self) {
                            const Tensor& G = g.grad_of(self);
                            if (g.requires_grad(ia)) accumulate(g.grad_buffer(ia), lblm::matmul(G, g.value(ib)));
                            if (g.requires_grad(ib)) {
                              accumulate(g.grad_buffer(ib), lblm::matmul(G.transposed(), g.value(ia)));
                            }
                          });
}

Var transpose(Var a) {
  const std::size_t ia = a.id();
  return a.graph().record("transpose", a.value().transposed(), {a}, [ia](Graph& g, std::size_t self) {
    accumulate(g.grad_buffer(ia), g.grad_of(self).transposed());
  });
}

Var add(Var a, Var b) {
  same_graph(a, b, "add");
  same_shape(a, b, "add");
  const std::size_t ia = a.id(), ib = b.id();
  return a.graph().record("add", lblm::add(a.value(), b.value()), {a, b}, [ia, ib](Graph& g, std::size_t self) {
    if (g.requires_grad(ia)) accumulate(g.grad_buffer(ia), g.grad_of(self));
    if (g.requires_grad(ib)) accumulate(g.grad_buffer(ib), g.grad_of(self));
  });
}

Var sub(Var a, Var b) {
  same_graph(a, b, "sub");
  same_shape(a, b, "sub");
  const std::size_t ia = a.id(), ib = b.id();
  return a.graph().record("sub", lblm::sub(a.value(), b.value()), {a, b}, [ia, ib](Graph& g, std::size_t self) {
    const Tensor& G = g.grad_of(self);
    if (g.requires_grad(ia)) accumulate(g.grad_buffer(ia), G);
    if (g.requires_grad(ib)) simd::axpy(-1.0, G.data(), g.grad_buffer(ib).data(), G.size());
  });
}

Var mul(Var a, Var b) {
  same_graph(a, b, "mul");
  same_shape(a, b, "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.graph().record("mul", std::move(out), {a, b}, [ia, ib](Graph& g, std::size_t self) {
    const Tensor& G = g.grad_of(self);
    if (g.requires_grad(ia)) {
      Tensor& ga = g.grad_buffer(ia);
      const Tensor& vb = g.value(ib);
      for (std::size_t i = 0; i < G.size(); ++i) ga[i] += G[i] * vb[i];
    }
    if (g.requires_grad(ib)) {
      Tensor& gb = g.grad_buffer(ib);
      const Tensor& va = g.value(ia);
      for (std::size_t i = 0; i < G.size(); ++i) gb[i] += G[i] * va[i];
    }
  });
}

Var scale(Var a, double s) {
  const std::size_t ia = a.id();
  return a.graph().record("scale", lblm::scale(a.value(), s), {a}, [ia, s](Graph& g, std::size_t self) {
    const Tensor& G = g.grad_of(self);
    simd::axpy(s, G.data(), g.grad_buffer(ia).data(), G.size());
  });
}

Var add_scalar(Var a, double s) {
  Tensor out = a.value();
  for (double& v : out.values()) v += s;
  const std::size_t ia = a.id();
  return a.graph().record("add_scalar", std::move(out), {a}, [ia](Graph& g, std::size_t self) {
    accumulate(g.grad_buffer(ia), g.grad_of(self));
  });
}

Var mul_scalar(Var x, Var s) {
  same_graph(x, s, "mul_scalar");
  if (s.value().size() != 1) throw DimensionError("mul_scalar: scale must be 1x1");
  const double sv = s.value()[0];
  const std::size_t ix = x.id(), is = s.id();
  return x.graph().record("mul_scalar", lblm::scale(x.value(), sv), {x, s}, [ix, is, sv](Graph& g, std::size_t self) {
    const Tensor& G = g.grad_of(self);
    if (g.requires_grad(ix)) simd::axpy(sv, G.data(), g.grad_buffer(ix).data(), G.size());
    if (g.requires_grad(is)) g.grad_buffer(is)[0] += simd::dot(G.data(), g.value(ix).data(), G.size());
  });
}

Var add_row(Var x, Var bias) {
  same_graph(x, bias, "add_row");
  const std::size_t n = x.cols();
  if (bias.value().size() != n) throw DimensionError("add_row: bias width mismatch");
  Tensor out = x.value();
  for (std::size_t r = 0; r < out.rows(); ++r) simd::axpy(1.0, bias.value().data(), out.data() + r * n, n);
  const std::size_t ix = x.id(), ib = bias.id();
  return x.graph().record("add_row", std::move(out), {x, bias}, [ix, ib, n](Graph& g, std::size_t self) {
    const Tensor& G = g.grad_of(self);
    if (g.requires_grad(ix)) accumulate(g.grad_buffer(ix), G);
    if (g.requires_grad(ib)) {
      Tensor& gb = g.grad_buffer(ib);
      for (std::size_t r = 0; r < G.rows(); ++r) simd::axpy(1.0, G.data() + r * n, gb.data(), n);
    }
  });
}

Var linear(Var x, Var w, Var b) { return add_row(matmul_nt(x, w), b); }
Var linear(Var x, Var w) { return matmul_nt(x, w); }

Var gelu(Var x) {
  Tensor out = x.value();
  for (double& v : out.values()) v = 0.5 * v * (1.0 + std::tanh(kGeluC * (v + 0.044715 * v * v * v)));
  const std::size_t ix = x.id();
  return x.graph().record("gelu", std::move(out), {x}, [ix](Graph& g, std::size_t self) {
    const Tensor& G = g.grad_of(self);
    const Tensor& xv = g.value(ix);
    Tensor& gx = g.grad_buffer(ix);
    for (std::size_t i = 0; i < G.size(); ++i) {
      const double v = xv[i];
      const double t = std::tanh(kGeluC * (v + 0.044715 * v * v * v));
      const double dt = (1.0 - t * t) * kGeluC * (1.0 + 3.0 * 0.044715 * v * v);
      gx[i] += G[i] * (0.5 * (1.0 + t) + 0.5 * v * dt);
    }
  });
}

Var tanh(Var x) {
  Tensor out = x.value();
  for (double& v : out.values()) v = std::tanh(v);
  const std::size_t ix = x.id();
  return x.graph().record("tanh", std::move(out), {x}, [ix](Graph& g, std::size_t self) {
    const Tensor& G = g.grad_of(self);
    const Tensor& y = g.value(self);
    Tensor& gx = g.grad_buffer(ix);
    for (std::size_t i = 0; i < G.size(); ++i) gx[i] += G[i] * (1.0 - y[i] * y[i]);
  });
}

Var normalize_groups(Var x, std::size_t group, double eps) {
  if (group == 0 || x.cols() % group != 0) throw DimensionError("normalize_groups: width not divisible by group");
  if (!(eps > 0.0)) throw ParameterError("normalize_groups: eps must be > 0");
  Tensor out = x.value();
  const std::size_t groups = out.size() / group;
  std::vector<double> inv_norm(groups);
  for (std::size_t k = 0; k < groups; ++k) {
    double* b = out.data() + k * group;
    inv_norm[k] = 1.0 / std::sqrt(simd::dot(b, b, group) + eps);
    for (std::size_t i = 0; i < group; ++i) b[i] *= inv_norm[k];
  }
  const std::size_t ix = x.id();
  return x.graph().record("normalize_groups", std::move(out), {x},
                          [ix, group, inv_norm = std::move(inv_norm)](Graph& g, std::size_t self) {
                            const Tensor& G = g.grad_of(self);
                            const Tensor& u = g.value(self);
                            Tensor& gx = g.grad_buffer(ix);
                            for (std::size_t k = 0; k < inv_norm.size(); ++k) {
                              const std::size_t o = k * group;
                              // d u / d b = (I - u uᵀ) / n
                              const double ug = simd::dot(u.data() + o, G.data() + o, group);
                              for (std::size_t i = 0; i < group; ++i) {
                                gx[o + i] += inv_norm[k] * (G[o + i] - u[o + i] * ug);
                              }
                            }
                          });
}

Var sigmoid(Var x) {
  Tensor out = x.value();
  for (double& v : out.values()) v = 1.0 / (1.0 + std::exp(-v));
  const std::size_t ix = x.id();
  return x.graph().record("sigmoid", std::move(out), {x}, [ix](Graph& g, std::size_t self) {
    const Tensor& G = g.grad_of(self);
    const Tensor& y = g.value(self);
    Tensor& gx = g.grad_buffer(ix);
    for (std::size_t i = 0; i < G.size(); ++i) gx[i] += G[i] * y[i] * (1.0 - y[i]);
  });
}

Var exp(Var x) {
  Tensor out = x.value();
  for (double& v : out.values()) v = std::exp(v);
  const std::size_t ix = x.id();
  return x.graph().record("exp", std::move(out), {x}, [ix](Graph& g, std::size_t self) {
    const Tensor& G = g.grad_of(self);
    const Tensor& y = g.value(self);
    Tensor& gx = g.grad_buffer(ix);
    for (std::size_t i = 0; i < G.size(); ++i) gx[i] += G[i] * y[i];
  });
}

Var clamp(Var x, double lo, double hi) {
  Tensor out = x.value();
  for (double& v : out.values()) v = std::clamp(v, lo, hi);
  const std::size_t ix = x.id();
  return x.graph().record("clamp", std::move(out), {x}, [ix, lo, hi](Graph& g, std::size_t self) {
    const Tensor& G = g.grad_of(self);
    const Tensor& xv = g.value(ix);
    Tensor& gx = g.grad_buffer(ix);
    for (std::size_t i = 0; i < G.size(); ++i)
      if (xv[i] > lo && xv[i] < hi) gx[i] += G[i];
  });
}

Var log_sigmoid(Var x) {
  Tensor out = x.value();
  // log σ(v) = -softplus(-v) = min(v, 0) - log1p(exp(-|v|))
  for (double& v : out.values()) v = std::min(v, 0.0) - std::log1p(std::exp(-std::abs(v)));
  const std::size_t ix = x.id();
  return x.graph().record("log_sigmoid", std::move(out), {x}, [ix](Graph& g, std::size_t self) {
    const Tensor& G = g.grad_of(self);
    const Tensor& xv = g.value(ix);
    Tensor& gx = g.grad_buffer(ix);
    for (std::size_t i = 0; i < G.size(); ++i) gx[i] += G[i] / (1.0 + std::exp(xv[i]));
  });
}

Var softmax_rows(Var x, double beta) {
  Tensor out = lblm::softmax(x.value(), beta);
  const std::size_t ix = x.id();
  return x.graph().record("softmax", std::move(out), {x}, [ix, beta](Graph& g, std::size_t self) {
    const Tensor& G = g.grad_of(self);
    const Tensor& y = g.value(self);
    Tensor& gx = g.grad_buffer(ix);
    const std::size_t n = y.cols();
    for (std::size_t r = 0; r < y.rows(); ++r) {
      const double* yr = y.data() + r * n;
      const double* gr = G.data() + r * n;
      const double inner = simd::dot(yr, gr, n);
      double* out = gx.data() + r * n;
      for (std::size_t j = 0; j < n; ++j) out[j] += beta * yr[j] * (gr[j] - inner);
    }
  });
}

Var layer_norm_rows(Var x, Var gain, Var bias, double eps) {
  same_graph(x, gain, "layer_norm");
  const std::size_t n = x.cols();
  if (gain.value().size() != n || bias.value().size() != n) throw DimensionError("layer_norm: parameter width");
  const std::size_t m = x.rows();
  Tensor xhat({m, n});
  std::vector<double> inv_std(m);
  Tensor out({m, n});
  for (std::size_t r = 0; r < m; ++r) {
    const double* xr = x.value().data() + r * n;
    double mu = 0.0;
    for (std::size_t j = 0; j < n; ++j) mu += xr[j];
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= static_cast<double>(n);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < n; ++j) {
      xhat.at(r, j) = (xr[j] - mu) * inv_std[r];
      out.at(r, j) = xhat.at(r, j) * gain.value()[j] + bias.value()[j];
    }
  }
  const std::size_t ix = x.id(), ig = gain.id(), ib = bias.id();
  return x.graph().record(
      "layer_norm", std::move(out), {x, gain, bias},
      [ix, ig, ib, n, m, xhat = std::move(xhat), inv_std = std::move(inv_std)](Graph& g, std::size_t self) {
        const Tensor& G = g.grad_of(self);
        const Tensor& gamma = g.value(ig);
        if (g.requires_grad(ig) || g.requires_grad(ib)) {
          for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t j = 0; j < n; ++j) {
              if (g.requires_grad(ig)) g.grad_buffer(ig)[j] += G.at(r, j) * xhat.at(r, j);
              if (g.requires_grad(ib)) g.grad_buffer(ib)[j] += G.at(r, j);
            }
          }
        }
        if (!g.requires_grad(ix)) return;
        Tensor& gx = g.grad_buffer(ix);
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t r = 0; r < m; ++r) {
          double sum_d = 0.0, sum_dx = 0.0;
          for (std::size_t j = 0; j < n; ++j) {
            const double d = G.at(r, j) * gamma[j];
            sum_d += d;
            sum_dx += d * xhat.at(r, j);
          }
          for (std::size_t j = 0; j < n; ++j) {
            const double d = G.at(r, j) * gamma[j];
            gx.at(r, j) += inv_std[r] * (d - inv_n * sum_d - xhat.at(r, j) * inv_n * sum_dx);
          }
        }
      });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat_rows: no operands");
  std::vector<Tensor> values;
  std::vector<std::size_t> ids;
  std::size_t cols = parts.front().cols();
  for (const Var& p : parts) {
    if (p.cols() != cols) throw DimensionError("concat_rows: width mismatch");
    values.push_back(p.value());
    ids.push_back(p.id());
  }
  return parts.front().graph().record("concat_rows", lblm::concat_rows(values), parts,
                                      [ids, cols](Graph& g, std::size_t self) {
                                        const Tensor& G = g.grad_of(self);
                                        std::size_t offset = 0;
                                        for (std::size_t id : ids) {
                                          const std::size_t n = g.value(id).size();
                                          if (g.requires_grad(id)) {
                                            simd::axpy(1.0, G.data() + offset, g.grad_buffer(id).data(), n);
                                          }
                                          offset += n;
                                        }
                                        (void)cols;
                                      });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat_cols: no operands");
  const std::size_t rows = parts.front().rows();
  std::size_t total = 0;
  std::vector<std::size_t> ids, widths;
  for (const Var& p : parts) {
    if (p.rows() != rows) throw DimensionError("concat_cols: row count mismatch");
    ids.push_back(p.id());
    widths.push_back(p.cols());
    total += p.cols();
  }
  Tensor out({rows, total});
  std::size_t c0 = 0;
  for (const Var& p : parts) {
    const std::size_t w = p.cols();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(p.value().data() + r * w, w, out.data() + r * total + c0);
    c0 += w;
  }
  return parts.front().graph().record("concat_cols", std::move(out), parts,
                                      [ids, widths, rows, total](Graph& g, std::size_t self) {
                                        const Tensor& G = g.grad_of(self);
                                        std::size_t c = 0;
                                        for (std::size_t k = 0; k < ids.size(); ++k) {
                                          const std::size_t w = widths[k];
                                          if (g.requires_grad(ids[k])) {
                                            Tensor& gb = g.grad_buffer(ids[k]);
                                            for (std::size_t r = 0; r < rows; ++r)
                                              simd::axpy(1.0, G.data() + r * total + c, gb.data() + r * w, w);
                                          }
                                          c += w;
                                        }
                                      });
}

Var slice_rows(Var x, std::size_t begin, std::size_t end) {
  const std::size_t ix = x.id();
  const std::size_t n = x.cols();
  return x.graph().record("slice_rows", x.value().slice_rows(begin, end), {x},
                          [ix, begin, n](Graph& g, std::size_t self) {
                            const Tensor& G = g.grad_of(self);
                            simd::axpy(1.0, G.data(), g.grad_buffer(ix).data() + begin * n, G.size());
                          });
}

Var slice_cols(Var x, std::size_t begin, std::size_t end) {
  const std::size_t rows = x.rows(), cols = x.cols();
  if (begin > end || end > cols) throw DimensionError("slice_cols out of range");
  const std::size_t w = end - begin;
  Tensor out({rows, w});
  for (std::size_t r = 0; r < rows; ++r) std::copy_n(x.value().data() + r * cols + begin, w, out.data() + r * w);
  const std::size_t ix = x.id();
  return x.graph().record("slice_cols", std::move(out), {x}, [ix, rows, cols, begin, w](Graph& g, std::size_t self) {
    const Tensor& G = g.grad_of(self);
    Tensor& gx = g.grad_buffer(ix);
    for (std::size_t r = 0; r < rows; ++r) simd::axpy(1.0, G.data() + r * w, gx.data() + r * cols + begin, w);
  });
}

Var element(Var x, std::size_t index) {
  if (index >= x.value().size()) throw DimensionError("element index out of range");
  const std::size_t ix = x.id();
  return x.graph().record("element", Tensor::scalar(x.value()[index]), {x}, [ix, index](Graph& g, std::size_t self) {
    g.grad_buffer(ix)[index] += g.grad_of(self)[0];
  });
}

Var sum(Var x) {
  double s = 0.0;
  for (double v : x.value().values()) s += v;
  const std::size_t ix = x.id();
  return x.graph().record("sum", Tensor::scalar(s), {x}, [ix](Graph& g, std::size_t self) {
    const double G = g.grad_of(self)[0];
    for (double& v : g.grad_buffer(ix).values()) v += G;
  });
}

Var mean(Var x) {
  if (x.value().empty()) throw ContractError("mean of empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.value().size()));
}

Var mean_rows(Var x) {
  const std::size_t m = x.rows(), n = x.cols();
  if (m == 0) throw ContractError("mean_rows of empty tensor");
  Tensor out({1, n});
  for (std::size_t r = 0; r < m; ++r) simd::axpy(1.0, x.value().data() + r * n, out.data(), n);
  const double inv = 1.0 / static_cast<double>(m);
  for (double& v : out.values()) v *= inv;
  const std::size_t ix = x.id();
  return x.graph().record("mean_rows", std::move(out), {x}, [ix, m, n, inv](Graph& g, std::size_t self) {
    const Tensor& G = g.grad_of(self);
    Tensor& gx = g.grad_buffer(ix);
    for (std::size_t r = 0; r < m; ++r) simd::axpy(inv, G.data(), gx.data() + r * n, n);
  });
}

Var relative_bias(Var table, std::size_t head, std::size_t q_pos0, std::size_t n_q, std::size_t n_k,
                  std::size_t clip_at) {
  const std::size_t width = 2 * clip_at + 1;
  if (table.cols() != width || head >= table.rows()) throw DimensionError("relative_bias: table shape");
  auto index = [=](std::size_t i, std::size_t j) {
    const long off = static_cast<long>(q_pos0 + i) - static_cast<long>(j);
    const long c = static_cast<long>(clip_at);
    return static_cast<std::size_t>(std::clamp(off, -c, c) + c);
  };
  Tensor out({n_q, n_k});
  const double* row = table.value().data() + head * width;
  for (std::size_t i = 0; i < n_q; ++i)
    for (std::size_t j = 0; j < n_k; ++j) out.at(i, j) = row[index(i, j)];
  const std::size_t it = table.id();
  return table.graph().record("relative_bias", std::move(out), {table},
                              [it, head, width, n_q, n_k, index](Graph& g, std::size_t self) {
                                const Tensor& G = g.grad_of(self);
                                double* row = g.grad_buffer(it).data() + head * width;
                                for (std::size_t i = 0; i < n_q; ++i)
                                  for (std::size_t j = 0; j < n_k; ++j) row[index(i, j)] += G.at(i, j);
                              });
}

Var detach(Var x) { return x.graph().constant(x.value()); }

}  // namespace lblm::ad
