// Copyright 2026 The icelayer Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "icelayer/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "icelayer/errors.hpp"

namespace icelayer::diff {

// ---- parameters -----------------------------------------------------------

Parameter::Parameter(std::string name_, Tensor value_)
    : name(std::move(name_)), value(std::move(value_)), grad(Tensor::zeros_like(value)) {}

Parameter& ParameterSet::add(std::string name, Tensor value) {
  if (find(name) != nullptr) throw ContractError("duplicate parameter '" + name + "'");
  params_.push_back(std::make_unique<Parameter>(std::move(name), std::move(value)));
  return *params_.back();
}

Parameter* ParameterSet::find(std::string_view name) {
  for (auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

const Parameter* ParameterSet::find(std::string_view name) const {
  return const_cast<ParameterSet*>(this)->find(name);
}

Parameter& ParameterSet::get(std::string_view name) {
  Parameter* p = find(name);
  if (p == nullptr) throw ContractError("unknown parameter '" + std::string(name) + "'");
  return *p;
}

const Parameter& ParameterSet::get(std::string_view name) const {
  return const_cast<ParameterSet*>(this)->get(name);
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

std::vector<Parameter*> ParameterSet::pointers() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<Tensor> ParameterSet::snapshot() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p->value);
  return out;
}

void ParameterSet::restore(const std::vector<Tensor>& values) {
  if (values.size() != params_.size()) throw ContractError("snapshot size does not match parameter set");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].shape() != params_[i]->value.shape()) {
      throw DimensionError("snapshot shape mismatch for '" + params_[i]->name + "'");
    }
    params_[i]->value = values[i];
  }
}

// ---- tape -----------------------------------------------------------------

const Tensor& Var::value() const { return tape_->value(id_); }

void Tape::check_open() const {
  if (consumed_) throw ContractError("tape already consumed by backward(); rebuild it");
}

Var Tape::constant(Tensor value) {
  check_open();
  nodes_.push_back(Node{std::move(value), {}, {}, {}, nullptr, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Parameter& p) {
  check_open();
  if (auto it = leaves_.find(&p); it != leaves_.end()) return Var(this, it->second);
  nodes_.push_back(Node{p.value, {}, {}, {}, &p, true});
  leaves_.emplace(&p, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward) {
  check_open();
  bool needs = false;
  for (std::size_t id : inputs) needs = needs || nodes_[id].requires_grad;
  Node node{std::move(value), {}, std::move(inputs), {}, nullptr, needs};
  if (needs) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Tensor& Tape::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.shape() != n.value.shape() || n.grad.size() != n.value.size()) n.grad = Tensor::zeros_like(n.value);
  return n.grad;
}

void Tape::backward(Var loss) {
  check_open();
  if (&loss.tape() != this) throw ContractError("loss belongs to a different tape");
  if (!value(loss.id()).is_scalar()) {
    throw ContractError("backward() needs a scalar loss, got shape " + shape_string(value(loss.id()).shape()));
  }
  consumed_ = true;
  visited_.clear();
  grad_buffer(loss.id()).fill(1.0);
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) {
      n.backward(*this, id);
      visited_.push_back(id);
    }
    if (n.param != nullptr) {
      auto dst = n.param->grad.data();
      auto src = nodes_[id].grad.data();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
  }
}

// ---- helpers --------------------------------------------------------------

namespace {

void require_matrix(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got " + shape_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

void accumulate(Tape& tape, std::size_t id, std::span<const double> g) {
  if (!tape.requires_grad(id)) return;
  auto dst = tape.grad_buffer(id).data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
}

// c (m×n) += a (m×k) · b (k×n)
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    const double* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = ai[p];
      if (aip == 0.0) continue;
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

// c (m×k) += g (m×n) · bᵀ, b is k×n
void gemm_nt(const double* g, const double* b, double* c, std::size_t m, std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* gi = g + i * n;
    double* ci = c + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double* bp = b + p * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += gi[j] * bp[j];
      ci[p] += acc;
    }
  }
}

// c (k×n) += aᵀ · g, a is m×k, g is m×n
void gemm_tn(const double* a, const double* g, double* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    const double* gi = g + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = ai[p];
      if (aip == 0.0) continue;
      double* cp = c + p * n;
      for (std::size_t j = 0; j < n; ++j) cp[j] += aip * gi[j];
    }
  }
}

template <typename Fwd, typename Deriv>
Var elementwise(Var x, Fwd fwd, Deriv deriv) {
  Tape& tape = x.tape();
  const Tensor& in = x.value();
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = fwd(in[i]);
  const std::size_t xi = x.id();
  return tape.record(std::move(out), {xi}, [xi, deriv](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& xin = t.value(xi);
    const Tensor& y = t.value(self);
    Tensor& gx = t.grad_buffer(xi);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * deriv(xin[i], y[i]);
  });
}

}  // namespace

// ---- linear algebra -------------------------------------------------------

Var matmul(Var a, Var b) {
  Tape& tape = a.tape();
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_matrix(av, "matmul");
  require_matrix(bv, "matmul");
  if (av.cols() != bv.rows()) {
    throw DimensionError("matmul: inner extents differ, " + shape_string(av.shape()) + " x " +
                         shape_string(bv.shape()));
  }
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  Tensor out(Shape{m, n});
  gemm_nn(av.data().data(), bv.data().data(), out.data().data(), m, k, n);
  const std::size_t ai = a.id(), bi = b.id();
  return tape.record(std::move(out), {ai, bi}, [ai, bi, m, k, n](Tape& t, std::size_t self) {
    const double* g = t.grad(self).data().data();
    if (t.requires_grad(ai)) gemm_nt(g, t.value(bi).data().data(), t.grad_buffer(ai).data().data(), m, n, k);
    if (t.requires_grad(bi)) gemm_tn(t.value(ai).data().data(), g, t.grad_buffer(bi).data().data(), m, k, n);
  });
}

Var add(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const std::size_t ai = a.id(), bi = b.id();
  return a.tape().record(std::move(out), {ai, bi}, [ai, bi](Tape& t, std::size_t self) {
    const auto g = t.grad(self).data();
    accumulate(t, ai, g);
    accumulate(t, bi, g);
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  const std::size_t ai = a.id(), bi = b.id();
  return a.tape().record(std::move(out), {ai, bi}, [ai, bi](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    accumulate(t, ai, g.data());
    if (t.requires_grad(bi)) {
      Tensor& gb = t.grad_buffer(bi);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const std::size_t ai = a.id(), bi = b.id();
  return a.tape().record(std::move(out), {ai, bi}, [ai, bi](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (t.requires_grad(ai)) {
      Tensor& ga = t.grad_buffer(ai);
      const Tensor& bv2 = t.value(bi);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv2[i];
    }
    if (t.requires_grad(bi)) {
      Tensor& gb = t.grad_buffer(bi);
      const Tensor& av2 = t.value(ai);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av2[i];
    }
  });
}

Var scale(Var x, double factor) {
  Tensor out = x.value();
  for (double& v : out.data()) v *= factor;
  const std::size_t xi = x.id();
  return x.tape().record(std::move(out), {xi}, [xi, factor](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad_buffer(xi);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += factor * g[i];
  });
}

Var add_bias(Var x, Var bias) {
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  require_matrix(xv, "add_bias");
  const std::size_t m = xv.rows(), n = xv.cols();
  if (bv.size() != n) {
    throw DimensionError("add_bias: bias " + shape_string(bv.shape()) + " does not fit " + shape_string(xv.shape()));
  }
  Tensor out = xv;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out(i, j) += bv[j];
  }
  const std::size_t xi = x.id(), bi = bias.id();
  return x.tape().record(std::move(out), {xi, bi}, [xi, bi, m, n](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    accumulate(t, xi, g.data());
    if (t.requires_grad(bi)) {
      Tensor& gb = t.grad_buffer(bi);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) gb[j] += g[i * n + j];
      }
    }
  });
}

Var concat_cols(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_matrix(av, "concat_cols");
  require_matrix(bv, "concat_cols");
  if (av.rows() != bv.rows()) {
    throw DimensionError("concat_cols: row counts differ, " + shape_string(av.shape()) + " vs " +
                         shape_string(bv.shape()));
  }
  const std::size_t m = av.rows(), na = av.cols(), nb = bv.cols();
  Tensor out(Shape{m, na + nb});
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(&av.data()[i * na], na, &out.data()[i * (na + nb)]);
    std::copy_n(&bv.data()[i * nb], nb, &out.data()[i * (na + nb) + na]);
  }
  const std::size_t ai = a.id(), bi = b.id();
  return a.tape().record(std::move(out), {ai, bi}, [ai, bi, m, na, nb](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (t.requires_grad(ai)) {
      Tensor& ga = t.grad_buffer(ai);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < na; ++j) ga[i * na + j] += g[i * (na + nb) + j];
      }
    }
    if (t.requires_grad(bi)) {
      Tensor& gb = t.grad_buffer(bi);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < nb; ++j) gb[i * nb + j] += g[i * (na + nb) + na + j];
      }
    }
  });
}

Var slice_rows(Var x, std::size_t begin, std::size_t end) {
  const Tensor& xv = x.value();
  require_matrix(xv, "slice_rows");
  if (begin > end || end > xv.rows()) {
    throw DimensionError("slice_rows: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") outside " + shape_string(xv.shape()));
  }
  const std::size_t n = xv.cols();
  Tensor out(Shape{end - begin, n});
  std::copy_n(&xv.data()[begin * n], (end - begin) * n, out.data().data());
  const std::size_t xi = x.id();
  return x.tape().record(std::move(out), {xi}, [xi, begin, n](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad_buffer(xi);
    for (std::size_t i = 0; i < g.size(); ++i) gx[begin * n + i] += g[i];
  });
}

Var slice_cols(Var x, std::size_t begin, std::size_t end) {
  const Tensor& xv = x.value();
  require_matrix(xv, "slice_cols");
  if (begin > end || end > xv.cols()) {
    throw DimensionError("slice_cols: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") outside " + shape_string(xv.shape()));
  }
  const std::size_t m = xv.rows(), n = xv.cols(), w = end - begin;
  Tensor out(Shape{m, w});
  for (std::size_t i = 0; i < m; ++i) std::copy_n(&xv.data()[i * n + begin], w, &out.data()[i * w]);
  const std::size_t xi = x.id();
  return x.tape().record(std::move(out), {xi}, [xi, begin, m, n, w](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad_buffer(xi);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < w; ++j) gx[i * n + begin + j] += g[i * w + j];
    }
  });
}

Var pairwise_sum(Var s, Var t) {
  const Tensor& sv = s.value();
  const Tensor& tv = t.value();
  require_matrix(sv, "pairwise_sum");
  require_matrix(tv, "pairwise_sum");
  if (sv.cols() != 1 || tv.cols() != 1) {
    throw DimensionError("pairwise_sum: expected column vectors, got " + shape_string(sv.shape()) + " and " +
                         shape_string(tv.shape()));
  }
  const std::size_t m = sv.rows(), n = tv.rows();
  Tensor out(Shape{m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out(i, j) = sv[i] + tv[j];
  }
  const std::size_t si = s.id(), ti = t.id();
  return s.tape().record(std::move(out), {si, ti}, [si, ti, m, n](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    if (tp.requires_grad(si)) {
      Tensor& gs = tp.grad_buffer(si);
      for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j];
        gs[i] += acc;
      }
    }
    if (tp.requires_grad(ti)) {
      Tensor& gt = tp.grad_buffer(ti);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) gt[j] += g[i * n + j];
      }
    }
  });
}

Var softmax_rows(Var x) {
  const Tensor& xv = x.value();
  require_matrix(xv, "softmax_rows");
  const std::size_t m = xv.rows(), n = xv.cols();
  Tensor out(Shape{m, n});
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = &xv.data()[i * n];
    double* dst = &out.data()[i * n];
    const double peak = *std::max_element(row, row + n);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      dst[j] = std::exp(row[j] - peak);
      total += dst[j];
    }
    for (std::size_t j = 0; j < n; ++j) dst[j] /= total;
  }
  const std::size_t xi = x.id();
  return x.tape().record(std::move(out), {xi}, [xi, m, n](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& y = t.value(self);
    Tensor& gx = t.grad_buffer(xi);
    for (std::size_t i = 0; i < m; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += g[i * n + j] * y[i * n + j];
      for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += y[i * n + j] * (g[i * n + j] - dot);
    }
  });
}

Var sum(Var x) {
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  const std::size_t xi = x.id();
  return x.tape().record(Tensor::scalar(total), {xi}, [xi](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    for (double& v : t.grad_buffer(xi).data()) v += g;
  });
}

Var mean(Var x) {
  const std::size_t n = x.value().size();
  if (n == 0) throw DimensionError("mean of an empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(n));
}

Var square(Var x) {
  return elementwise(
      x, [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Var mean_squared_error(Var pred, const Tensor& target) {
  const Tensor& pv = pred.value();
  require_same_shape(pv, target, "mean_squared_error");
  if (pv.size() == 0) throw DimensionError("mean_squared_error on empty tensors");
  const double n = static_cast<double>(pv.size());
  Tensor diff(pv.shape());
  double total = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    diff[i] = pv[i] - target[i];
    total += diff[i] * diff[i];
  }
  const std::size_t pi = pred.id();
  return pred.tape().record(Tensor::scalar(total / n), {pi},
                            [pi, n, diff = std::move(diff)](Tape& t, std::size_t self) {
                              const double g = t.grad(self)[0];
                              Tensor& gp = t.grad_buffer(pi);
                              for (std::size_t i = 0; i < diff.size(); ++i) gp[i] += g * 2.0 * diff[i] / n;
                            });
}

// ---- activations ----------------------------------------------------------

Activation Activation::parse(std::string_view name, double slope) {
  if (name == "hardswish") return {ActivationKind::hardswish, slope};
  if (name == "leaky_relu") return {ActivationKind::leaky_relu, slope};
  if (name == "sigmoid") return {ActivationKind::sigmoid, slope};
  if (name == "tanh") return {ActivationKind::tanh, slope};
  if (name == "relu6") return {ActivationKind::relu6, slope};
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

std::string_view activation_name(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::hardswish: return "hardswish";
    case ActivationKind::leaky_relu: return "leaky_relu";
    case ActivationKind::sigmoid: return "sigmoid";
    case ActivationKind::tanh: return "tanh";
    case ActivationKind::relu6: return "relu6";
  }
  return "unknown";
}

double hardswish(double x) { return x * std::min(std::max(x + 3.0, 0.0), 6.0) / 6.0; }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Var hardswish(Var x) {
  return elementwise(
      x, [](double v) { return hardswish(v); },
      [](double v, double) {
        if (v <= -3.0) return 0.0;
        if (v >= 3.0) return 1.0;
        return (2.0 * v + 3.0) / 6.0;
      });
}

Var leaky_relu(Var x, double slope) {
  return elementwise(
      x, [slope](double v) { return v > 0.0 ? v : slope * v; },
      [slope](double v, double) { return v > 0.0 ? 1.0 : slope; });
}

Var sigmoid(Var x) {
  return elementwise(
      x, [](double v) { return sigmoid(v); }, [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var x) {
  return elementwise(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var relu6(Var x) {
  return elementwise(
      x, [](double v) { return std::min(std::max(v, 0.0), 6.0); },
      [](double v, double) { return (v > 0.0 && v < 6.0) ? 1.0 : 0.0; });
}

Var activation(const Activation& act, Var x) {
  switch (act.kind) {
    case ActivationKind::hardswish: return hardswish(x);
    case ActivationKind::leaky_relu: return leaky_relu(x, act.slope);
    case ActivationKind::sigmoid: return sigmoid(x);
    case ActivationKind::tanh: return tanh(x);
    case ActivationKind::relu6: return relu6(x);
  }
  throw ConfigError("unknown activation kind");
}

Var dropout(Var x, double p, bool training, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout probability must lie in [0, 1), got " + std::to_string(p));
  if (!training || p == 0.0) return x;
  Tape& tape = x.tape();
  tape.mark_stochastic();
  const Tensor& xv = x.value();
  Tensor mask(xv.shape());
  const double keep_scale = 1.0 / (1.0 - p);
  for (double& m : mask.data()) m = rng.bernoulli(p) ? 0.0 : keep_scale;
  Tensor out = xv;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  const std::size_t xi = x.id();
  return tape.record(std::move(out), {xi}, [xi, mask = std::move(mask)](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad_buffer(xi);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * mask[i];
  });
}

// ---- gradient check -------------------------------------------------------

namespace {

double evaluate_loss(const LossBuilder& builder) {
  Tape tape;
  Var loss = builder(tape);
  if (tape.stochastic()) throw ContractError("gradient_check: loss builder is stochastic (dropout active)");
  if (!loss.value().is_scalar()) throw ContractError("gradient_check: loss is not scalar");
  return loss.value().item();
}

}  // namespace

GradientCheckResult gradient_check(std::span<Parameter* const> params, const LossBuilder& builder, double h) {
  if (!(h > 0.0)) throw ConfigError("gradient_check step must be positive");
  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape;
    Var loss = builder(tape);
    if (tape.stochastic()) throw ContractError("gradient_check: loss builder is stochastic (dropout active)");
    tape.backward(loss);
  }

  GradientCheckResult result;
  for (Parameter* p : params) {
    const Tensor analytic = p->grad;
    double diff_sq = 0.0, analytic_sq = 0.0, numeric_sq = 0.0, max_abs = 0.0;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + h;
      const double up = evaluate_loss(builder);
      p->value[i] = saved - h;
      const double down = evaluate_loss(builder);
      p->value[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double d = analytic[i] - numeric;
      diff_sq += d * d;
      analytic_sq += analytic[i] * analytic[i];
      numeric_sq += numeric * numeric;
      max_abs = std::max(max_abs, std::abs(d));
    }
    const double denom = std::max({std::sqrt(analytic_sq), std::sqrt(numeric_sq), 1e-8});
    ParameterCheck check{p->name, std::sqrt(diff_sq) / denom, max_abs};
    if (check.relative_error >= result.max_relative_error) {
      result.max_relative_error = check.relative_error;
      result.worst_parameter = p->name;
    }
    result.parameters.push_back(std::move(check));
  }
  for (Parameter* p : params) p->zero_grad();
  return result;
}

}  // namespace icelayer::diff
