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

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "icelayer/rng.hpp"
#include "icelayer/tensor.hpp"

namespace icelayer::diff {

// A named trainable array together with its accumulated gradient.
struct Parameter {
  Parameter(std::string name, Tensor value);

  std::string name;
  Tensor value;
  Tensor grad;

  void zero_grad() { grad.fill(0.0); }
};

// Owns a model's parameters. Addresses stay stable for the lifetime of the set.
class ParameterSet {
 public:
  Parameter& add(std::string name, Tensor value);
  Parameter& get(std::string_view name);
  const Parameter& get(std::string_view name) const;
  Parameter* find(std::string_view name);
  const Parameter* find(std::string_view name) const;

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  void zero_grad();

  std::vector<Parameter*> pointers();
  std::vector<Tensor> snapshot() const;
  void restore(const std::vector<Tensor>& values);

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.cbegin(); }
  auto end() const { return params_.cend(); }

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

class Tape;

// Handle to a value recorded on a tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Propagates the gradient of node `self` into the gradients of its inputs.
using BackwardFn = std::function<void(Tape&, std::size_t self)>;

// Ordered record of executed operations. One backward pass consumes it.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // Leaf bound to `p`; repeated calls with the same parameter return the same
  // leaf. Gradients reaching it are added into p.grad during backward().
  Var parameter(Parameter& p);

  // Used by operation implementations.
  Var record(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward);
  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  const Tensor& grad(std::size_t id) const { return nodes_[id].grad; }
  // Gradient buffer of `id`, zero-allocated on first use.
  Tensor& grad_buffer(std::size_t id);
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  void backward(Var loss);

  bool consumed() const { return consumed_; }
  bool stochastic() const { return stochastic_; }
  void mark_stochastic() { stochastic_ = true; }
  std::size_t size() const { return nodes_.size(); }
  // Node ids whose backward function ran, in visiting order.
  const std::vector<std::size_t>& backward_order() const { return visited_; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
  };

  void check_open() const;

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> leaves_;
  std::vector<std::size_t> visited_;
  bool consumed_ = false;
  bool stochastic_ = false;
};

// ---- operations -----------------------------------------------------------

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var x, double factor);
// x: m×n, bias: 1×n (or n); bias broadcast over rows.
Var add_bias(Var x, Var bias);
// [a ‖ b] along columns; same row count.
Var concat_cols(Var a, Var b);
// Rows [begin, end) of x.
Var slice_rows(Var x, std::size_t begin, std::size_t end);
// Columns [begin, end) of x.
Var slice_cols(Var x, std::size_t begin, std::size_t end);
// s: m×1, t: n×1 -> m×n with out(i, j) = s(i) + t(j).
Var pairwise_sum(Var s, Var t);
Var softmax_rows(Var x);
Var sum(Var x);
Var mean(Var x);
Var square(Var x);
// mean((pred - target)^2) over every entry.
Var mean_squared_error(Var pred, const Tensor& target);

enum class ActivationKind { hardswish, leaky_relu, sigmoid, tanh, relu6 };

struct Activation {
  ActivationKind kind = ActivationKind::hardswish;
  double slope = 0.2;  // leaky_relu only

  // Accepts "hardswish", "leaky_relu", "sigmoid", "tanh", "relu6".
  static Activation parse(std::string_view name, double slope = 0.2);
};

std::string_view activation_name(ActivationKind kind);

Var activation(const Activation& act, Var x);
Var hardswish(Var x);
Var leaky_relu(Var x, double slope);
Var sigmoid(Var x);
Var tanh(Var x);
Var relu6(Var x);

// Scalar forms, shared with reference code in tests.
double hardswish(double x);
double sigmoid(double x);

// Inverted dropout. Training mode zeroes each element with probability p and
// scales survivors by 1/(1-p); evaluation mode is the identity. p in [0, 1).
Var dropout(Var x, double p, bool training, Rng& rng);

// ---- gradient verification ------------------------------------------------

struct ParameterCheck {
  std::string name;
  // ||analytic - numeric|| / max(||analytic||, ||numeric||, 1e-8) over the
  // parameter's elements.
  double relative_error = 0.0;
  double max_abs_error = 0.0;
};

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::vector<ParameterCheck> parameters;
};

using LossBuilder = std::function<Var(Tape&)>;

// Compares backward() against central differences with step h for every
// element of every parameter. The builder must be deterministic: a tape that
// ran training-mode dropout raises ContractError. Parameter gradients are
// zero on return.
GradientCheckResult gradient_check(std::span<Parameter* const> params, const LossBuilder& loss, double h = 1e-6);

}  // namespace icelayer::diff
