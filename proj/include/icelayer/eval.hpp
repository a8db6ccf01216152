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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "icelayer/models.hpp"
#include "icelayer/prepared.hpp"
#include "icelayer/tensor.hpp"

namespace icelayer::eval {

using models::ModelKind;

struct RmseResult {
  std::vector<double> per_year;  // one per target column
  double total = 0.0;            // pooled over every entry
};

// pred and target are stacked (records * nodes) x years.
RmseResult rmse(const Tensor& pred, const Tensor& target);

// Row-stacks matrices with equal column counts.
Tensor stack_rows(std::span<const Tensor> blocks);

struct TrialReport {
  ModelKind model = ModelKind::gat_lstm;
  std::size_t trial = 0;
  std::vector<double> per_year_px;
  double total_px = 0.0;

  std::vector<double> per_year_cm() const;
  double total_cm() const;
};

TrialReport evaluate(models::Model& model, std::span<const TemporalGraphSequence* const> sequences,
                     std::size_t trial);
// Scores the dataset's test split.
TrialReport evaluate_test(models::Model& model, const PreparedDataset& data);

// Per-year training-split means used as a constant prediction.
std::vector<double> train_mean_prediction(const PreparedDataset& data);
TrialReport evaluate_constant(const std::vector<double>& per_year, const PreparedDataset& data);

struct ModelAggregate {
  ModelKind model = ModelKind::gat_lstm;
  double mean_total = 0.0;
  double std_total = 0.0;  // sample (n - 1)
  std::vector<double> mean_year;
  std::vector<double> std_year;
};

struct AggregateReport {
  std::vector<ModelAggregate> models;  // in kAllModelKinds order
  std::size_t trials = 0;

  const ModelAggregate& get(ModelKind kind) const;
};

// Requires exactly `trials` reports (indices 0..trials-1) per model present.
AggregateReport aggregate(std::span<const TrialReport> reports, std::size_t trials = kTrials);

double sample_stddev(std::span<const double> values);

// "4.768 ± 0.372"
std::string format_mean_std(double mean, double stddev, int decimals = 3);

// metrics.csv (model,trial,year,rmse_px,rmse_cm), summary.csv and, when
// requested, summary.svg inside `directory`.
void emit_report(const AggregateReport& aggregates, std::span<const TrialReport> reports,
                 const std::filesystem::path& directory, bool svg = true);

std::string metrics_csv(std::span<const TrialReport> reports);
std::string summary_csv(const AggregateReport& aggregates);
std::string summary_svg(const AggregateReport& aggregates);

// Shortest round-trip decimal form.
std::string format_double(double value);

}  // namespace icelayer::eval
