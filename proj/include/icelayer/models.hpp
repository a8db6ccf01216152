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

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "icelayer/autodiff.hpp"
#include "icelayer/geograph.hpp"

namespace icelayer::models {

using diff::Parameter;
using diff::ParameterSet;
using diff::Tape;
using diff::Var;

enum class ModelKind { gat_lstm, gcn, lstm };
enum class EdgeBias { none, log_weight };

ModelKind parse_model_kind(std::string_view name);
std::string_view model_kind_name(ModelKind kind);
EdgeBias parse_edge_bias(std::string_view name);
std::string_view edge_bias_name(EdgeBias bias);

inline constexpr ModelKind kAllModelKinds[] = {ModelKind::gat_lstm, ModelKind::gcn, ModelKind::lstm};

struct ModelConfig {
  ModelKind kind = ModelKind::gat_lstm;
  std::size_t hidden = 48;
  std::vector<std::size_t> head_widths{32, 24, 10};
  double dropout = 0.2;
  std::size_t attention_heads = 1;
  double leaky_slope = 0.2;
  EdgeBias edge_bias = EdgeBias::none;

  // Throws ConfigError unless the final head width is kTargetYears and
  // dropout lies in [0, 1).
  void validate() const;
};

// ---- layer parameters -----------------------------------------------------

struct GATHead {
  Parameter* weight = nullptr;     // in x out
  Parameter* attention = nullptr;  // 2*out x 1: [source half; neighbour half]
};

struct GATLayerParams {
  std::vector<GATHead> heads;
};

struct GATOptions {
  double leaky_slope = 0.2;
  EdgeBias edge_bias = EdgeBias::none;
};

struct LSTMGate {
  Parameter* input = nullptr;      // in x hidden
  Parameter* recurrent = nullptr;  // hidden x hidden
  Parameter* bias = nullptr;       // 1 x hidden
};

// Gate order: input, forget, cell, output.
struct LSTMGateParams {
  std::array<LSTMGate, 4> gates;
};

struct GATLSTMGate {
  GATLayerParams attention;  // over [X_t ‖ H_{t-1}]
  Parameter* bias = nullptr;
};

struct GATLSTMCellParams {
  std::array<GATLSTMGate, 4> gates;
};

struct GCNLayerParams {
  Parameter* weight = nullptr;
};

struct DenseParams {
  Parameter* weight = nullptr;
  Parameter* bias = nullptr;
};

struct HeadParams {
  std::vector<DenseParams> layers;
};

inline constexpr std::size_t kGateInput = 0;
inline constexpr std::size_t kGateForget = 1;
inline constexpr std::size_t kGateCell = 2;
inline constexpr std::size_t kGateOutput = 3;

// ---- layers ---------------------------------------------------------------

// Attention matrices produced during a forward pass, for inspection.
using AttentionTrace = std::vector<Tensor>;

Var gat_layer(Var x, const AdjacencyMatrix& adjacency, const GATLayerParams& params, const GATOptions& options,
              AttentionTrace* trace = nullptr);

// D^-1/2 (A + I) D^-1/2 with D the row sums of A + I.
Tensor gcn_propagation(const AdjacencyMatrix& adjacency);
Var gcn_layer(Var x, const AdjacencyMatrix& adjacency, const GCNLayerParams& params);
Var gcn_layer(Var x, const Tensor& propagation, const GCNLayerParams& params);

struct RecurrentState {
  Var hidden;
  Var cell;
};

RecurrentState lstm_cell(Var x, const RecurrentState& previous, const LSTMGateParams& params);
RecurrentState gat_lstm_cell(Var x, const RecurrentState& previous, const AdjacencyMatrix& adjacency,
                             const GATLSTMCellParams& params, const GATOptions& options,
                             AttentionTrace* trace = nullptr);

struct ForwardMode {
  bool training = false;
  Rng* dropout_rng = nullptr;  // required when training with dropout > 0
};

// Hardswish on the recurrent output, then the dense chain with Hardswish and
// dropout between dense layers; the final layer is linear.
Var mlp_head(Var hidden, const HeadParams& params, double dropout, const ForwardMode& mode);

// ---- models ---------------------------------------------------------------

class Model {
 public:
  // Glorot-uniform weights and attention vectors, zero biases except the
  // forget gate (1.0).
  Model(ModelConfig config, std::uint64_t seed);

  Model(Model&&) = default;
  Model& operator=(Model&&) = default;

  const ModelConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  ParameterSet& parameters() { return params_; }
  const ParameterSet& parameters() const { return params_; }

  // N x kTargetYears predictions for a normalized sequence.
  Var forward(Tape& tape, const TemporalGraphSequence& sequence, const ForwardMode& mode = {},
              AttentionTrace* trace = nullptr);

  // Evaluation-mode forward without gradients.
  Tensor predict(const TemporalGraphSequence& sequence);

  const GATLSTMCellParams& gat_lstm_params() const { return gat_lstm_; }
  const LSTMGateParams& lstm_params() const { return lstm_; }
  const GCNLayerParams& gcn_params() const { return gcn_; }
  const HeadParams& head_params() const { return head_; }

 private:
  ModelConfig config_;
  std::uint64_t seed_ = 0;
  ParameterSet params_;
  GATLSTMCellParams gat_lstm_;
  LSTMGateParams lstm_;
  GCNLayerParams gcn_;
  HeadParams head_;
};

// Features of the GCN baseline: [lat, lon, elev, t_1998 .. t_2002].
Tensor consolidated_features(const TemporalGraphSequence& sequence);
inline constexpr std::size_t kConsolidatedFeatures = 3 + kFeatureYears;

// Glorot-uniform bound sqrt(6 / (fan_in + fan_out)).
double glorot_bound(std::size_t fan_in, std::size_t fan_out);

}  // namespace icelayer::models
