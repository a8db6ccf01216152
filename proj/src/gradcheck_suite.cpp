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

#include "icelayer/gradcheck_suite.hpp"

#include <cmath>
#include <functional>

#include "icelayer/autodiff.hpp"
#include "icelayer/models.hpp"
#include "icelayer/rng.hpp"

namespace icelayer::verify {

namespace {

using diff::LossBuilder;
using diff::Parameter;
using diff::ParameterSet;
using diff::Tape;
using diff::Var;

Tensor random_tensor(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

// Values kept at least `margin` away from every point in `kinks`.
Tensor random_away_from(Rng& rng, Shape shape, double lo, double hi, std::vector<double> kinks,
                        double margin = 0.05) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) {
    bool ok = false;
    while (!ok) {
      v = rng.uniform(lo, hi);
      ok = true;
      for (double k : kinks) ok = ok && std::abs(v - k) > margin;
    }
  }
  return t;
}

// Random linear read-out so every output element influences the loss.
Var readout(Tape& tape, Var y, std::uint64_t seed) {
  Rng rng(seed);
  return diff::sum(diff::mul(y, tape.constant(random_tensor(rng, y.value().shape()))));
}

class Case {
 public:
  explicit Case(std::string name) : name_(std::move(name)) {}

  Parameter& param(const std::string& id, Tensor value) { return set_.add(name_ + "." + id, std::move(value)); }

  GradcheckRow run(const LossBuilder& builder, const GradcheckOptions& options) {
    const auto ptrs = set_.pointers();
    const auto result = diff::gradient_check(ptrs, builder, options.step);
    GradcheckRow row;
    row.component = name_;
    row.max_relative_error = result.max_relative_error;
    row.worst_parameter = result.worst_parameter;
    row.scalars = set_.scalar_count();
    row.passed = result.max_relative_error < options.tolerance;
    return row;
  }

  ParameterSet& set() { return set_; }

 private:
  std::string name_;
  ParameterSet set_;
};

// y = x^3 with a deliberately wrong derivative (2x^2 instead of 3x^2).
Var faulty_cube(Var x) {
  Tensor out = x.value();
  for (double& v : out.data()) v = v * v * v;
  const std::size_t xi = x.id();
  return x.tape().record(std::move(out), {xi}, [xi](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& xv = t.value(xi);
    Tensor& gx = t.grad_buffer(xi);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * 2.0 * xv[i] * xv[i];
  });
}

using UnaryOp = std::function<Var(Var)>;

GradcheckRow unary_case(const std::string& name, const UnaryOp& op, Tensor input, const GradcheckOptions& options,
                        std::uint64_t seed) {
  Case c(name);
  Parameter& x = c.param("x", std::move(input));
  return c.run([&](Tape& t) { return readout(t, op(t.parameter(x)), seed); }, options);
}

}  // namespace

TemporalGraphSequence toy_sequence(std::size_t nodes, std::uint64_t seed) {
  Rng rng(seed);
  TemporalGraphSequence s;
  s.record_id = "toy_" + std::to_string(seed);
  for (std::size_t i = 0; i < nodes; ++i) {
    s.coordinates.push_back(GeoCoordinate{70.0 + 0.001 * static_cast<double>(i), -40.0, 2000.0});
  }
  for (std::size_t g = 0; g < kFeatureYears; ++g) {
    FeatureGraph graph{kFirstFeatureYear + static_cast<int>(g), Tensor(Shape{nodes, kNodeFeatures})};
    for (std::size_t i = 0; i < nodes; ++i) {
      for (std::size_t d = 0; d < kNodeFeatures; ++d) graph.features(i, d) = rng.normal();
    }
    s.graphs.push_back(std::move(graph));
  }
  s.adjacency.weights = Tensor(Shape{nodes, nodes});
  for (std::size_t i = 0; i < nodes; ++i) {
    for (std::size_t j = i + 1; j < nodes; ++j) {
      const double w = rng.uniform();
      s.adjacency.weights(i, j) = w;
      s.adjacency.weights(j, i) = w;
    }
  }
  s.adjacency.state = AdjacencyState::minmax;
  s.targets = Tensor(Shape{nodes, kTargetYears});
  for (double& v : s.targets.data()) v = 10.0 + 2.0 * rng.normal();
  return s;
}

std::vector<GradcheckRow> run_gradcheck_suite(const GradcheckOptions& options) {
  std::vector<GradcheckRow> rows;
  Rng rng(options.seed);
  const std::uint64_t s = options.seed;

  // ---- binary and structural ops
  {
    Case c("matmul");
    Parameter& a = c.param("a", random_tensor(rng, {4, 5}));
    Parameter& b = c.param("b", random_tensor(rng, {5, 3}));
    rows.push_back(c.run([&](Tape& t) { return readout(t, diff::matmul(t.parameter(a), t.parameter(b)), s); }, options));
  }
  {
    Case c("add");
    Parameter& a = c.param("a", random_tensor(rng, {3, 4}));
    Parameter& b = c.param("b", random_tensor(rng, {3, 4}));
    rows.push_back(c.run([&](Tape& t) { return readout(t, diff::add(t.parameter(a), t.parameter(b)), s); }, options));
  }
  {
    Case c("sub");
    Parameter& a = c.param("a", random_tensor(rng, {3, 4}));
    Parameter& b = c.param("b", random_tensor(rng, {3, 4}));
    rows.push_back(c.run([&](Tape& t) { return readout(t, diff::sub(t.parameter(a), t.parameter(b)), s); }, options));
  }
  {
    Case c("mul");
    Parameter& a = c.param("a", random_tensor(rng, {3, 4}));
    Parameter& b = c.param("b", random_tensor(rng, {3, 4}));
    rows.push_back(c.run([&](Tape& t) { return readout(t, diff::mul(t.parameter(a), t.parameter(b)), s); }, options));
  }
  rows.push_back(unary_case("scale", [](Var x) { return diff::scale(x, -1.7); }, random_tensor(rng, {3, 4}), options, s));
  {
    Case c("add_bias");
    Parameter& x = c.param("x", random_tensor(rng, {4, 3}));
    Parameter& b = c.param("b", random_tensor(rng, {1, 3}));
    rows.push_back(c.run([&](Tape& t) { return readout(t, diff::add_bias(t.parameter(x), t.parameter(b)), s); }, options));
  }
  {
    Case c("concat_cols");
    Parameter& a = c.param("a", random_tensor(rng, {3, 2}));
    Parameter& b = c.param("b", random_tensor(rng, {3, 4}));
    rows.push_back(
        c.run([&](Tape& t) { return readout(t, diff::concat_cols(t.parameter(a), t.parameter(b)), s); }, options));
  }
  rows.push_back(
      unary_case("slice_rows", [](Var x) { return diff::slice_rows(x, 1, 3); }, random_tensor(rng, {4, 3}), options, s));
  rows.push_back(
      unary_case("slice_cols", [](Var x) { return diff::slice_cols(x, 1, 3); }, random_tensor(rng, {3, 4}), options, s));
  {
    Case c("pairwise_sum");
    Parameter& a = c.param("s", random_tensor(rng, {4, 1}));
    Parameter& b = c.param("t", random_tensor(rng, {5, 1}));
    rows.push_back(
        c.run([&](Tape& t) { return readout(t, diff::pairwise_sum(t.parameter(a), t.parameter(b)), s); }, options));
  }
  rows.push_back(unary_case("softmax_rows", [](Var x) { return diff::softmax_rows(x); },
                            random_tensor(rng, {4, 5}, -2.0, 2.0), options, s));
  rows.push_back(unary_case("sum", [](Var x) { return diff::scale(diff::sum(x), 1.0); }, random_tensor(rng, {3, 3}),
                            options, s));
  rows.push_back(unary_case("mean", [](Var x) { return diff::mean(x); }, random_tensor(rng, {3, 3}), options, s));
  rows.push_back(unary_case("square", [](Var x) { return diff::square(x); }, random_tensor(rng, {3, 3}), options, s));
  {
    Case c("mean_squared_error");
    Parameter& p = c.param("pred", random_tensor(rng, {4, 3}));
    const Tensor target = random_tensor(rng, {4, 3});
    rows.push_back(c.run([&](Tape& t) { return diff::mean_squared_error(t.parameter(p), target); }, options));
  }

  // ---- activations
  rows.push_back(unary_case("hardswish", [](Var x) { return diff::hardswish(x); },
                            random_away_from(rng, {4, 6}, -5.0, 5.0, {-3.0, 3.0}), options, s));
  rows.push_back(unary_case("leaky_relu", [](Var x) { return diff::leaky_relu(x, 0.2); },
                            random_away_from(rng, {4, 6}, -3.0, 3.0, {0.0}), options, s));
  rows.push_back(unary_case("sigmoid", [](Var x) { return diff::sigmoid(x); }, random_tensor(rng, {4, 6}, -4.0, 4.0),
                            options, s));
  rows.push_back(
      unary_case("tanh", [](Var x) { return diff::tanh(x); }, random_tensor(rng, {4, 6}, -3.0, 3.0), options, s));
  rows.push_back(unary_case("relu6", [](Var x) { return diff::relu6(x); },
                            random_away_from(rng, {4, 6}, -2.0, 8.0, {0.0, 6.0}), options, s));
  {
    Rng unused(0);
    rows.push_back(unary_case("dropout(eval)", [&unused](Var x) { return diff::dropout(x, 0.2, false, unused); },
                              random_tensor(rng, {3, 4}), options, s));
  }

  // ---- layers
  const TemporalGraphSequence toy = toy_sequence(5, options.seed + 17);
  const auto gat_case = [&](const std::string& name, std::size_t heads, models::EdgeBias bias) {
    Case c(name);
    Parameter& x = c.param("x", random_tensor(rng, {5, 6}));
    models::GATLayerParams params;
    for (std::size_t k = 0; k < heads; ++k) {
      models::GATHead h;
      h.weight = &c.param("head" + std::to_string(k) + ".weight", random_tensor(rng, {6, 4}));
      h.attention = &c.param("head" + std::to_string(k) + ".attention", random_tensor(rng, {8, 1}));
      params.heads.push_back(h);
    }
    const models::GATOptions opts{0.2, bias};
    return c.run([&](Tape& t) { return readout(t, models::gat_layer(t.parameter(x), toy.adjacency, params, opts), s); },
                 options);
  };
  rows.push_back(gat_case("gat_layer", 1, models::EdgeBias::none));
  rows.push_back(gat_case("gat_layer(log_weight,2 heads)", 2, models::EdgeBias::log_weight));
  {
    Case c("gcn_layer");
    Parameter& x = c.param("x", random_tensor(rng, {5, 8}));
    models::GCNLayerParams params{&c.param("weight", random_tensor(rng, {8, 6}))};
    rows.push_back(
        c.run([&](Tape& t) { return readout(t, models::gcn_layer(t.parameter(x), toy.adjacency, params), s); }, options));
  }
  const auto lstm_gates = [&](Case& c, std::size_t in, std::size_t hidden) {
    models::LSTMGateParams p;
    for (std::size_t g = 0; g < 4; ++g) {
      const std::string prefix = "gate" + std::to_string(g);
      p.gates[g].input = &c.param(prefix + ".input", random_tensor(rng, {in, hidden}));
      p.gates[g].recurrent = &c.param(prefix + ".recurrent", random_tensor(rng, {hidden, hidden}));
      p.gates[g].bias = &c.param(prefix + ".bias", random_tensor(rng, {1, hidden}));
    }
    return p;
  };
  {
    Case c("lstm_cell");
    Parameter& x = c.param("x", random_tensor(rng, {3, 4}));
    Parameter& h = c.param("h", random_tensor(rng, {3, 5}));
    Parameter& cell = c.param("c", random_tensor(rng, {3, 5}));
    const auto p = lstm_gates(c, 4, 5);
    rows.push_back(c.run(
        [&](Tape& t) {
          const auto st = models::lstm_cell(t.parameter(x), {t.parameter(h), t.parameter(cell)}, p);
          return diff::add(readout(t, st.hidden, s), readout(t, st.cell, s + 1));
        },
        options));
  }
  {
    Case c("gat_lstm_cell");
    Parameter& x = c.param("x", random_tensor(rng, {5, 4}));
    Parameter& h = c.param("h", random_tensor(rng, {5, 6}));
    Parameter& cell = c.param("c", random_tensor(rng, {5, 6}));
    models::GATLSTMCellParams p;
    for (std::size_t g = 0; g < 4; ++g) {
      const std::string prefix = "gate" + std::to_string(g);
      models::GATHead head{&c.param(prefix + ".weight", random_tensor(rng, {10, 6})),
                           &c.param(prefix + ".attention", random_tensor(rng, {12, 1}))};
      p.gates[g].attention.heads.push_back(head);
      p.gates[g].bias = &c.param(prefix + ".bias", random_tensor(rng, {1, 6}));
    }
    const models::GATOptions opts{0.2, models::EdgeBias::none};
    rows.push_back(c.run(
        [&](Tape& t) {
          const auto st = models::gat_lstm_cell(t.parameter(x), {t.parameter(h), t.parameter(cell)}, toy.adjacency, p, opts);
          return diff::add(readout(t, st.hidden, s), readout(t, st.cell, s + 1));
        },
        options));
  }
  {
    Case c("mlp_head");
    Parameter& x = c.param("x", random_away_from(rng, {4, 6}, -4.0, 4.0, {-3.0, 3.0}));
    models::HeadParams p;
    const std::size_t widths[] = {6, 5, 4, 10};
    for (std::size_t l = 0; l + 1 < 4; ++l) {
      p.layers.push_back(
          {&c.param("layer" + std::to_string(l) + ".weight", random_tensor(rng, {widths[l], widths[l + 1]})),
           &c.param("layer" + std::to_string(l) + ".bias", random_tensor(rng, {1, widths[l + 1]}))});
    }
    rows.push_back(
        c.run([&](Tape& t) { return readout(t, models::mlp_head(t.parameter(x), p, 0.2, {}), s); }, options));
  }

  // ---- full models, default architecture, dropout off
  for (models::ModelKind kind : models::kAllModelKinds) {
    models::ModelConfig config;
    config.kind = kind;
    models::Model model(config, options.seed + 100 + static_cast<std::uint64_t>(kind));
    const auto ptrs = model.parameters().pointers();
    TemporalGraphSequence seq = toy_sequence(4, options.seed + 200 + static_cast<std::uint64_t>(kind));
    // Targets just off the current prediction: the loss stays small next to its
    // gradient, which keeps the differencing roundoff well under tolerance.
    seq.targets = model.predict(seq);
    for (double& v : seq.targets.data()) v += 0.1 * rng.normal();
    const auto result = diff::gradient_check(
        ptrs,
        [&](Tape& t) { return diff::mean_squared_error(model.forward(t, seq, {}), seq.targets); },
        options.step);
    rows.push_back(GradcheckRow{"model:" + std::string(models::model_kind_name(kind)), result.max_relative_error,
                                result.worst_parameter, model.parameters().scalar_count(),
                                result.max_relative_error < options.tolerance});
  }

  if (options.include_faulty_fixture) {
    rows.push_back(unary_case("faulty_fixture", faulty_cube, random_tensor(rng, {3, 3}, 0.5, 1.5), options, s));
  }
  return rows;
}

}  // namespace icelayer::verify
