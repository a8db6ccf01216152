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

#include "icelayer/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <filesystem>

#include "icelayer/errors.hpp"
#include "icelayer/io.hpp"

namespace icelayer::eval {

RmseResult rmse(const Tensor& pred, const Tensor& target) {
  if (pred.shape() != target.shape()) {
    throw DimensionError("rmse: shape mismatch " + shape_string(pred.shape()) + " vs " + shape_string(target.shape()));
  }
  if (pred.size() == 0) throw ConfigError("rmse over an empty test set");
  const std::size_t rows = pred.rows(), cols = pred.cols();
  std::vector<double> year_sq(cols, 0.0);
  double total_sq = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double d = pred(i, j) - target(i, j);
      year_sq[j] += d * d;
      total_sq += d * d;
    }
  }
  RmseResult r;
  for (double s : year_sq) r.per_year.push_back(std::sqrt(s / static_cast<double>(rows)));
  r.total = std::sqrt(total_sq / static_cast<double>(rows * cols));
  return r;
}

Tensor stack_rows(std::span<const Tensor> blocks) {
  if (blocks.empty()) return Tensor(Shape{0, 0});
  const std::size_t cols = blocks.front().cols();
  std::size_t rows = 0;
  for (const auto& b : blocks) {
    if (b.cols() != cols) throw DimensionError("stack_rows: column counts differ");
    rows += b.rows();
  }
  std::vector<double> data;
  data.reserve(rows * cols);
  for (const auto& b : blocks) data.insert(data.end(), b.storage().begin(), b.storage().end());
  return Tensor(Shape{rows, cols}, std::move(data));
}

std::vector<double> TrialReport::per_year_cm() const {
  std::vector<double> out;
  for (double v : per_year_px) out.push_back(v * kCentimetersPerPixel);
  return out;
}

double TrialReport::total_cm() const { return total_px * kCentimetersPerPixel; }

TrialReport evaluate(models::Model& model, std::span<const TemporalGraphSequence* const> sequences, std::size_t trial) {
  if (sequences.empty()) throw ConfigError("evaluation over an empty test split");
  std::vector<Tensor> preds, targets;
  for (const auto* s : sequences) {
    preds.push_back(model.predict(*s));
    targets.push_back(s->targets);
  }
  const RmseResult r = rmse(stack_rows(preds), stack_rows(targets));
  return TrialReport{model.config().kind, trial, r.per_year, r.total};
}

TrialReport evaluate_test(models::Model& model, const PreparedDataset& data) {
  return evaluate(model, data.select(data.split.test), data.trial);
}

std::vector<double> train_mean_prediction(const PreparedDataset& data) {
  std::vector<double> mean(kTargetYears, 0.0);
  double rows = 0.0;
  for (const auto* s : data.select(data.split.train)) {
    for (std::size_t i = 0; i < s->targets.rows(); ++i) {
      for (std::size_t j = 0; j < kTargetYears; ++j) mean[j] += s->targets(i, j);
    }
    rows += static_cast<double>(s->targets.rows());
  }
  if (rows == 0.0) throw ConfigError("empty training split");
  for (double& m : mean) m /= rows;
  return mean;
}

TrialReport evaluate_constant(const std::vector<double>& per_year, const PreparedDataset& data) {
  std::vector<Tensor> preds, targets;
  for (const auto* s : data.select(data.split.test)) {
    Tensor p(s->targets.shape());
    for (std::size_t i = 0; i < p.rows(); ++i) {
      for (std::size_t j = 0; j < p.cols(); ++j) p(i, j) = per_year.at(j);
    }
    preds.push_back(std::move(p));
    targets.push_back(s->targets);
  }
  const RmseResult r = rmse(stack_rows(preds), stack_rows(targets));
  return TrialReport{ModelKind::gat_lstm, data.trial, r.per_year, r.total};
}

double sample_stddev(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return std::sqrt(sq / static_cast<double>(values.size() - 1));
}

const ModelAggregate& AggregateReport::get(ModelKind kind) const {
  for (const auto& m : models) {
    if (m.model == kind) return m;
  }
  throw ContractError("no aggregate for model " + std::string(models::model_kind_name(kind)));
}

AggregateReport aggregate(std::span<const TrialReport> reports, std::size_t trials) {
  AggregateReport out;
  out.trials = trials;
  for (ModelKind kind : models::kAllModelKinds) {
    std::vector<const TrialReport*> mine(trials, nullptr);
    std::size_t seen = 0;
    for (const auto& r : reports) {
      if (r.model != kind) continue;
      ++seen;
      if (r.trial >= trials || mine[r.trial] != nullptr) {
        throw ConfigError("unexpected or duplicate trial " + std::to_string(r.trial) + " for model " +
                          std::string(models::model_kind_name(kind)));
      }
      mine[r.trial] = &r;
    }
    if (seen == 0) continue;
    if (seen != trials) {
      throw ConfigError("model " + std::string(models::model_kind_name(kind)) + " has " + std::to_string(seen) +
                        " of " + std::to_string(trials) + " trials");
    }
    ModelAggregate agg;
    agg.model = kind;
    std::vector<double> totals;
    for (const auto* r : mine) totals.push_back(r->total_px);
    agg.mean_total = std::accumulate(totals.begin(), totals.end(), 0.0) / static_cast<double>(trials);
    agg.std_total = sample_stddev(totals);
    const std::size_t years = mine.front()->per_year_px.size();
    for (std::size_t y = 0; y < years; ++y) {
      std::vector<double> vals;
      for (const auto* r : mine) vals.push_back(r->per_year_px.at(y));
      agg.mean_year.push_back(std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(trials));
      agg.std_year.push_back(sample_stddev(vals));
    }
    out.models.push_back(std::move(agg));
  }
  if (out.models.empty()) throw ConfigError("aggregate: no trial reports");
  return out;
}

std::string format_mean_std(double mean, double stddev, int decimals) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.*f \xC2\xB1 %.*f", decimals, mean, decimals, stddev);
  return buf;
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

std::string metrics_csv(std::span<const TrialReport> reports) {
  std::vector<const TrialReport*> sorted;
  for (const auto& r : reports) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](const TrialReport* a, const TrialReport* b) {
    return std::pair(static_cast<int>(a->model), a->trial) < std::pair(static_cast<int>(b->model), b->trial);
  });
  std::string out = "model,trial,year,rmse_px,rmse_cm\n";
  for (const auto* r : sorted) {
    for (std::size_t y = 0; y < r->per_year_px.size(); ++y) {
      out += std::string(models::model_kind_name(r->model)) + "," + std::to_string(r->trial) + "," +
             std::to_string(kFirstTargetYear + static_cast<int>(y)) + "," + format_double(r->per_year_px[y]) + "," +
             format_double(r->per_year_px[y] * kCentimetersPerPixel) + "\n";
    }
  }
  return out;
}

std::string summary_csv(const AggregateReport& aggregates) {
  std::string out = "model,total_rmse_px,mean_px,std_px,mean_cm,std_cm,trials\n";
  for (const auto& m : aggregates.models) {
    out += std::string(models::model_kind_name(m.model)) + "," + format_mean_std(m.mean_total, m.std_total) + "," +
           format_double(m.mean_total) + "," + format_double(m.std_total) + "," +
           format_double(m.mean_total * kCentimetersPerPixel) + "," + format_double(m.std_total * kCentimetersPerPixel) +
           "," + std::to_string(aggregates.trials) + "\n";
  }
  return out;
}

std::string summary_svg(const AggregateReport& aggregates) {
  constexpr double kWidth = 860.0, kHeight = 420.0, kLeft = 60.0, kBottom = 360.0, kTop = 40.0;
  static constexpr const char* kColors[] = {"#1b9e77", "#d95f02", "#7570b3"};
  double peak = 0.0;
  std::size_t years = 0;
  for (const auto& m : aggregates.models) {
    years = std::max(years, m.mean_year.size());
    for (std::size_t y = 0; y < m.mean_year.size(); ++y) peak = std::max(peak, m.mean_year[y] + m.std_year[y]);
  }
  if (peak <= 0.0) peak = 1.0;
  const double plot_w = kWidth - kLeft - 20.0;
  const double group_w = years > 0 ? plot_w / static_cast<double>(years) : plot_w;
  const double bar_w = group_w * 0.8 / static_cast<double>(std::max<std::size_t>(1, aggregates.models.size()));
  const auto y_of = [&](double v) { return kBottom - (kBottom - kTop) * v / peak; };
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" font-family=\"sans-serif\" "
                "font-size=\"11\">\n",
                kWidth, kHeight);
  out += buf;
  out += "<text x=\"60\" y=\"20\" font-size=\"13\">Per-year test RMSE (px), mean \xC2\xB1 std over trials</text>\n";
  std::snprintf(buf, sizeof buf, "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", kLeft,
                kBottom, kWidth - 20.0, kBottom);
  out += buf;
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = peak * tick / 4.0;
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%.2f</text>\n", kLeft - 6.0,
                  y_of(v) + 4.0, v);
    out += buf;
  }
  for (std::size_t k = 0; k < aggregates.models.size(); ++k) {
    const auto& m = aggregates.models[k];
    const char* color = kColors[static_cast<int>(m.model) % 3];
    for (std::size_t y = 0; y < m.mean_year.size(); ++y) {
      const double x = kLeft + group_w * static_cast<double>(y) + group_w * 0.1 + bar_w * static_cast<double>(k);
      std::snprintf(buf, sizeof buf, "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"%s\"/>\n", x,
                    y_of(m.mean_year[y]), bar_w, kBottom - y_of(m.mean_year[y]), color);
      out += buf;
      const double cx = x + bar_w / 2.0;
      std::snprintf(buf, sizeof buf,
                    "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n", cx,
                    y_of(m.mean_year[y] - m.std_year[y]), cx, y_of(m.mean_year[y] + m.std_year[y]));
      out += buf;
    }
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.1f\" y=\"%.1f\" width=\"10\" height=\"10\" fill=\"%s\"/><text x=\"%.1f\" y=\"%.1f\">%s "
                  "%s</text>\n",
                  kWidth - 260.0, 30.0 + 14.0 * static_cast<double>(k), color, kWidth - 245.0,
                  39.0 + 14.0 * static_cast<double>(k), std::string(models::model_kind_name(m.model)).c_str(),
                  format_mean_std(m.mean_total, m.std_total).c_str());
    out += buf;
  }
  for (std::size_t y = 0; y < years; ++y) {
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%d</text>\n",
                  kLeft + group_w * (static_cast<double>(y) + 0.5), kBottom + 16.0, kFirstTargetYear + static_cast<int>(y));
    out += buf;
  }
  out += "</svg>\n";
  return out;
}

void emit_report(const AggregateReport& aggregates, std::span<const TrialReport> reports,
                 const std::filesystem::path& directory, bool svg) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw IoError("cannot create " + directory.string() + ": " + ec.message());
  io::write_text(directory / "metrics.csv", metrics_csv(reports));
  io::write_text(directory / "summary.csv", summary_csv(aggregates));
  if (svg) io::write_text(directory / "summary.svg", summary_svg(aggregates));
}

}  // namespace icelayer::eval
