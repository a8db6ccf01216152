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

#include "icelayer/prepared.hpp"

#include <unordered_set>

namespace icelayer {

StatisticsScope parse_statistics_scope(std::string_view name) {
  if (name == "all") return StatisticsScope::all;
  if (name == "train_only") return StatisticsScope::train_only;
  throw ConfigError("unknown statistics scope '" + std::string(name) + "' (all|train_only)");
}

std::string_view statistics_scope_name(StatisticsScope scope) {
  return scope == StatisticsScope::all ? "all" : "train_only";
}

void PreparedDataset::reindex() {
  index_.clear();
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    if (!index_.emplace(sequences[i].record_id, i).second) {
      throw DataError("duplicate record id '" + sequences[i].record_id + "' in prepared dataset");
    }
  }
}

const TemporalGraphSequence& PreparedDataset::sequence(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) throw DataError("record '" + std::string(id) + "' missing from prepared dataset");
  return sequences[it->second];
}

std::vector<const TemporalGraphSequence*> PreparedDataset::select(std::span<const std::string> ids) const {
  std::vector<const TemporalGraphSequence*> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(&sequence(id));
  return out;
}

std::vector<TemporalGraphSequence> assemble_all(std::span<const LabeledRecord> usable, const EdgeWeightOptions& edges,
                                                Diagnostics* diag) {
  std::vector<TemporalGraphSequence> out;
  out.reserve(usable.size());
  for (const auto& r : usable) out.push_back(assemble_sequence(r.id, r.geo, r.thickness, edges, diag));
  return out;
}

PreparedDataset prepare_trial(std::span<const TemporalGraphSequence> raw, const SplitPlan& plan,
                              const PrepareOptions& options, Diagnostics* diag) {
  PreparedDataset data;
  data.trial = plan.trial;
  data.seed = options.seed;
  data.edges = options.edges;
  data.scope = options.scope;
  data.split = plan;
  data.sequences.assign(raw.begin(), raw.end());
  data.reindex();

  std::vector<const TemporalGraphSequence*> basis;
  if (options.scope == StatisticsScope::all) {
    for (const auto& s : data.sequences) basis.push_back(&s);
  } else {
    basis = data.select(plan.train);
  }
  std::vector<const AdjacencyMatrix*> matrices;
  for (const auto* s : basis) matrices.push_back(&s->adjacency);
  data.adjacency_stats = compute_adjacency_minmax(matrices, diag);
  data.feature_stats = compute_feature_stats(basis, diag);
  for (auto& s : data.sequences) {
    apply_adjacency_minmax(s.adjacency, data.adjacency_stats);
    apply_feature_stats(s, data.feature_stats);
  }
  return data;
}

std::vector<PreparedDataset> prepare_trials(std::span<const LabeledRecord> usable, const PrepareOptions& options,
                                            Diagnostics* diag) {
  std::vector<std::string> ids;
  for (const auto& r : usable) ids.push_back(r.id);
  const auto plans = make_splits(ids, options.seed);
  const auto raw = assemble_all(usable, options.edges, diag);
  std::vector<PreparedDataset> out;
  for (const auto& plan : plans) out.push_back(prepare_trial(raw, plan, options, diag));
  return out;
}

}  // namespace icelayer
