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
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "icelayer/dataset.hpp"
#include "icelayer/geograph.hpp"

namespace icelayer {

// Which records contribute to the collective normalization statistics.
enum class StatisticsScope { all, train_only };

StatisticsScope parse_statistics_scope(std::string_view name);
std::string_view statistics_scope_name(StatisticsScope scope);

struct PrepareOptions {
  std::uint64_t seed = 0;
  EdgeWeightOptions edges;
  StatisticsScope scope = StatisticsScope::all;
};

// One trial's worth of normalized graph sequences with its split and the
// statistics that produced them.
struct PreparedDataset {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  EdgeWeightOptions edges;
  StatisticsScope scope = StatisticsScope::all;
  FeatureStats feature_stats;
  MinMaxStats adjacency_stats;
  SplitPlan split;
  std::vector<TemporalGraphSequence> sequences;

  std::size_t node_count() const { return sequences.empty() ? 0 : sequences.front().node_count(); }
  const TemporalGraphSequence& sequence(std::string_view id) const;
  std::vector<const TemporalGraphSequence*> select(std::span<const std::string> ids) const;
  void reindex();

 private:
  std::unordered_map<std::string, std::size_t> index_;
};

std::vector<TemporalGraphSequence> assemble_all(std::span<const LabeledRecord> usable, const EdgeWeightOptions& edges,
                                                Diagnostics* diag = nullptr);

// Normalizes a copy of `raw` collectively (statistics over every sequence, or
// over the plan's training records for train_only) and attaches the plan.
PreparedDataset prepare_trial(std::span<const TemporalGraphSequence> raw, const SplitPlan& plan,
                              const PrepareOptions& options, Diagnostics* diag = nullptr);

// Assembles every usable record, splits them, and normalizes features and
// adjacency collectively. Returns one dataset per trial.
std::vector<PreparedDataset> prepare_trials(std::span<const LabeledRecord> usable, const PrepareOptions& options,
                                            Diagnostics* diag = nullptr);

}  // namespace icelayer
