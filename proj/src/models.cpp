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

#include "icelayer/models.hpp"

#include <cmath>

#include "icelayer/errors.hpp"

namespace icelayer::models {

ModelKind parse_model_kind(std::string_view name) {
  if (name == "gat_lstm") return ModelKind::gat_lstm;
  if (name == "gcn") return ModelKind::gcn;
  if (name == "lstm") return ModelKind::lstm;
  throw ConfigError("unknown model kind '" + std::string(name) + "' (gat_lstm|gcn|lstm)");
}

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::gat_lstm: return "gat_lstm";
    case ModelKind::gcn: return "gcn";
    case ModelKind::lstm: return "lstm";
  }
  return "unknown";
}

EdgeBias parse_edge_bias(std::string_view name) {
  if (name == "none") return EdgeBias::none;
  if (name == "log_weight") return EdgeBias::log_weight;
  throw ConfigError("unknown edge bias '" + std::string(name) + "' (none|log_weight)");
}

std::string_view edge_bias_name(EdgeBias bias) { return bias == EdgeBias::none ? "none" : "log_weight"; }

void ModelConfig::validate() const {
  if (hidden == 0) throw ConfigError("hidden width must be positive");
  if (head_widths.empty() || head_widths.back() != kTargetYears) {
    throw ConfigError("final head width must equal the number of target years (" + std::to_string(kTargetYears) +
                      ")");
  }
  for (std::size_t w : head_widths) {
    if (w == 0) throw ConfigError("head widths must be positive");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (attention_heads == 0) throw ConfigError("attention_heads must be positive");
  if (!(leaky_slope >= 0.0)) throw ConfigError("leaky_slope must be nonnegative");
}

double glorot_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

// ---- layers ---------------------------------------------------------------

namespace {

Tensor log_weight_bias(const AdjacencyMatrix& adjacency) {
  const std::size_t n = adjacency.size();
  Tensor bias(Shape{n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) bias(i, j) = std::log(adjacency.weights(i, j) + 1e-8);
    }
  }
  return bias;
}

Var gate_activation(std::size_t gate, Var z) {
  return gate == kGateCell ? diff::tanh(z) : diff::sigmoid(z);
}

RecurrentState combine_gates(const std::array<Var, 4>& z, const RecurrentState& previous) {
  Var i = gate_activation(kGateInput, z[kGateInput]);
  Var f = gate_activation(kGateForget, z[kGateForget]);
  Var candidate = gate_activation(kGateCell, z[kGateCell]);
  Var o = gate_activation(kGateOutput, z[kGateOutput]);
  Var cell = diff::add(diff::mul(f, previous.cell), diff::mul(i, candidate));
  Var hidden = diff::mul(o, diff::tanh(cell));
  return RecurrentState{hidden, cell};
}

}  // namespace

Var gat_layer(Var x, const AdjacencyMatrix& adjacency, const GATLayerParams& params, const GATOptions& options,
              AttentionTrace* trace) {
  Tape& tape = x.tape();
  const std::size_t n = x.value().rows();
  if (params.heads.empty()) throw ConfigError("gat_layer needs at least one head");
  if (options.edge_bias == EdgeBias::log_weight && adjacency.size() != n) {
    throw DimensionError("gat_layer: adjacency of size " + std::to_string(adjacency.size()) + " for " +
                         std::to_string(n) + " nodes");
  }
  Var output;
  for (const GATHead& head : params.heads) {
    Var h = diff::matmul(x, tape.parameter(*head.weight));
    const std::size_t width = h.value().cols();
    Var a = tape.parameter(*head.attention);
    if (a.value().rows() != 2 * width || a.value().cols() != 1) {
      throw DimensionError("gat_layer: attention vector " + shape_string(a.value().shape()) + " for width " +
                           std::to_string(width));
    }
    Var source = diff::matmul(h, diff::slice_rows(a, 0, width));
    Var neighbour = diff::matmul(h, diff::slice_rows(a, width, 2 * width));
    Var logits = diff::leaky_relu(diff::pairwise_sum(source, neighbour), options.leaky_slope);
    if (options.edge_bias == EdgeBias::log_weight) logits = diff::add(logits, tape.constant(log_weight_bias(adjacency)));
    Var alpha = diff::softmax_rows(logits);
    if (trace != nullptr) trace->push_back(alpha.value());
    Var head_out = diff::matmul(alpha, h);
    output = output.valid() ? diff::add(output, head_out) : head_out;
  }
  if (params.heads.size() > 1) output = diff::scale(output, 1.0 / static_cast<double>(params.heads.size()));
  return output;
}

Tensor gcn_propagation(const AdjacencyMatrix& adjacency) {
  const std::size_t n = adjacency.size();
  Tensor p(Shape{n, n});
  std::vector<double> degree(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double w = adjacency.weights(i, j) + (i == j ? 1.0 : 0.0);
      p(i, j) = w;
      degree[i] += w;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) p(i, j) /= std::sqrt(degree[i] * degree[j]);
  }
  return p;
}

Var gcn_layer(Var x, const Tensor& propagation, const GCNLayerParams& params) {
  Tape& tape = x.tape();
  if (propagation.rows() != x.value().rows()) {
    throw DimensionError("gcn_layer: propagation " + shape_string(propagation.shape()) + " for features " +
                         shape_string(x.value().shape()));
  }
  Var xw = diff::matmul(x, tape.parameter(*params.weight));
  return diff::matmul(tape.constant(propagation), xw);
}

Var gcn_layer(Var x, const AdjacencyMatrix& adjacency, const GCNLayerParams& params) {
  return gcn_layer(x, gcn_propagation(adjacency), params);
}

RecurrentState lstm_cell(Var x, const RecurrentState& previous, const LSTMGateParams& params) {
  Tape& tape = x.tape();
  std::array<Var, 4> z;
  for (std::size_t g = 0; g < 4; ++g) {
    const LSTMGate& gate = params.gates[g];
    Var affine = diff::add(diff::matmul(x, tape.parameter(*gate.input)),
                           diff::matmul(previous.hidden, tape.parameter(*gate.recurrent)));
    z[g] = diff::add_bias(affine, tape.parameter(*gate.bias));
  }
  return combine_gates(z, previous);
}

RecurrentState gat_lstm_cell(Var x, const RecurrentState& previous, const AdjacencyMatrix& adjacency,
                             const GATLSTMCellParams& params, const GATOptions& options, AttentionTrace* trace) {
  Tape& tape = x.tape();
  Var joint = diff::concat_cols(x, previous.hidden);
  std::array<Var, 4> z;
  for (std::size_t g = 0; g < 4; ++g) {
    const GATLSTMGate& gate = params.gates[g];
    z[g] = diff::add_bias(gat_layer(joint, adjacency, gate.attention, options, trace), tape.parameter(*gate.bias));
  }
  return combine_gates(z, previous);
}

Var mlp_head(Var hidden, const HeadParams& params, double dropout, const ForwardMode& mode) {
  Tape& tape = hidden.tape();
  if (mode.training && dropout > 0.0 && mode.dropout_rng == nullptr) {
    throw ContractError("training-mode forward with dropout needs a generator");
  }
  Var a = diff::hardswish(hidden);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const DenseParams& dense = params.layers[l];
    a = diff::add_bias(diff::matmul(a, tape.parameter(*dense.weight)), tape.parameter(*dense.bias));
    if (l + 1 < params.layers.size()) {
      a = diff::hardswish(a);
      if (mode.training && dropout > 0.0) a = diff::dropout(a, dropout, true, *mode.dropout_rng);
    }
  }
  return a;
}

// ---- model ----------------------------------------------------------------

namespace {

constexpr const char* kGateNames[] = {"input", "forget", "cell", "output"};

class Initializer {
 public:
  Initializer(ParameterSet& params, std::uint64_t seed) : params_(params), rng_(seed) {}

  Parameter* glorot(const std::string& name, std::size_t fan_in, std::size_t fan_out, Shape shape) {
    const double bound = glorot_bound(fan_in, fan_out);
    Tensor t(std::move(shape));
    for (double& v : t.data()) v = rng_.uniform(-bound, bound);
    return &params_.add(name, std::move(t));
  }

  Parameter* weight(const std::string& name, std::size_t in, std::size_t out) {
    return glorot(name, in, out, Shape{in, out});
  }

  Parameter* constant(const std::string& name, std::size_t width, double value) {
    return &params_.add(name, Tensor(Shape{1, width}, value));
  }

 private:
  ParameterSet& params_;
  Rng rng_;
};

}  // namespace

Model::Model(ModelConfig config, std::uint64_t seed) : config_(std::move(config)), seed_(seed) {
  config_.validate();
  Initializer init(params_, seed);
  const std::size_t hidden = config_.hidden;
  switch (config_.kind) {
    case ModelKind::gat_lstm:
      for (std::size_t g = 0; g < 4; ++g) {
        const std::string prefix = std::string("gat_lstm.") + kGateNames[g];
        GATLSTMGate& gate = gat_lstm_.gates[g];
        for (std::size_t k = 0; k < config_.attention_heads; ++k) {
          const std::string head = prefix + ".head" + std::to_string(k);
          GATHead h;
          h.weight = init.weight(head + ".weight", kNodeFeatures + hidden, hidden);
          h.attention = init.glorot(head + ".attention", 2 * hidden, 1, Shape{2 * hidden, 1});
          gate.attention.heads.push_back(h);
        }
        gate.bias = init.constant(prefix + ".bias", hidden, g == kGateForget ? 1.0 : 0.0);
      }
      break;
    case ModelKind::gcn:
      gcn_.weight = init.weight("gcn.weight", kConsolidatedFeatures, hidden);
      break;
    case ModelKind::lstm:
      for (std::size_t g = 0; g < 4; ++g) {
        const std::string prefix = std::string("lstm.") + kGateNames[g];
        LSTMGate& gate = lstm_.gates[g];
        gate.input = init.weight(prefix + ".input", kNodeFeatures, hidden);
        gate.recurrent = init.weight(prefix + ".recurrent", hidden, hidden);
        gate.bias = init.constant(prefix + ".bias", hidden, g == kGateForget ? 1.0 : 0.0);
      }
      break;
  }
  std::size_t in = hidden;
  for (std::size_t l = 0; l < config_.head_widths.size(); ++l) {
    const std::size_t out = config_.head_widths[l];
    const std::string prefix = "head." + std::to_string(l);
    head_.layers.push_back(DenseParams{init.weight(prefix + ".weight", in, out), init.constant(prefix + ".bias", out, 0.0)});
    in = out;
  }
}

Tensor consolidated_features(const TemporalGraphSequence& sequence) {
  if (sequence.graphs.size() != kFeatureYears) {
    throw ContractError("consolidated features need " + std::to_string(kFeatureYears) + " graphs");
  }
  const std::size_t n = sequence.graphs.front().features.rows();
  Tensor out(Shape{n, kConsolidatedFeatures});
  for (std::size_t i = 0; i < n; ++i) {
    out(i, 0) = sequence.graphs.front().features(i, kFeatureLatitude);
    out(i, 1) = sequence.graphs.front().features(i, kFeatureLongitude);
    out(i, 2) = sequence.graphs.front().features(i, kFeatureElevation);
    for (std::size_t y = 0; y < kFeatureYears; ++y) out(i, 3 + y) = sequence.graphs[y].features(i, kFeatureThickness);
  }
  return out;
}

Var Model::forward(Tape& tape, const TemporalGraphSequence& sequence, const ForwardMode& mode,
                   AttentionTrace* trace) {
  if (sequence.graphs.empty()) throw ContractError("sequence '" + sequence.record_id + "' has no graphs");
  const std::size_t n = sequence.graphs.front().features.rows();
  for (const auto& g : sequence.graphs) {
    if (g.features.rows() != n || g.features.cols() != kNodeFeatures) {
      throw DimensionError("sequence '" + sequence.record_id + "': feature graph shape " +
                           shape_string(g.features.shape()));
    }
  }
  if (config_.kind != ModelKind::lstm) {
    if (sequence.adjacency.size() != n) {
      throw ContractError(std::string(model_kind_name(config_.kind)) + " needs an adjacency matrix over " +
                          std::to_string(n) + " nodes");
    }
    if (sequence.adjacency.state != AdjacencyState::minmax) {
      throw ContractError(std::string(model_kind_name(config_.kind)) + " expects a normalized adjacency");
    }
  }
  const std::size_t hidden = config_.hidden;
  Var top;
  switch (config_.kind) {
    case ModelKind::gat_lstm: {
      const GATOptions options{config_.leaky_slope, config_.edge_bias};
      RecurrentState state{tape.constant(Tensor(Shape{n, hidden})), tape.constant(Tensor(Shape{n, hidden}))};
      for (const auto& g : sequence.graphs) {
        state = gat_lstm_cell(tape.constant(g.features), state, sequence.adjacency, gat_lstm_, options, trace);
      }
      top = state.hidden;
      break;
    }
    case ModelKind::gcn:
      top = gcn_layer(tape.constant(consolidated_features(sequence)), sequence.adjacency, gcn_);
      break;
    case ModelKind::lstm: {
      RecurrentState state{tape.constant(Tensor(Shape{n, hidden})), tape.constant(Tensor(Shape{n, hidden}))};
      for (const auto& g : sequence.graphs) state = lstm_cell(tape.constant(g.features), state, lstm_);
      top = state.hidden;
      break;
    }
  }
  return mlp_head(top, head_, config_.dropout, mode);
}

Tensor Model::predict(const TemporalGraphSequence& sequence) {
  Tape tape;
  return forward(tape, sequence, ForwardMode{}).value();
}

}  // namespace icelayer::models
