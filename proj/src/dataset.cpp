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

#include "icelayer/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <numeric>

#include "icelayer/rng.hpp"

namespace icelayer {

void validate_record(const EchogramRecord& record, std::size_t expected_columns) {
  if (record.width != expected_columns) {
    throw RecordRejected(record.id, "mask width " + std::to_string(record.width) + ", expected " +
                                        std::to_string(expected_columns));
  }
  if (record.mask.size() != record.height * record.width) {
    throw RecordRejected(record.id, "mask holds " + std::to_string(record.mask.size()) + " pixels for " +
                                        std::to_string(record.height) + "x" + std::to_string(record.width));
  }
  if (record.geo.size() != record.width) {
    throw RecordRejected(record.id, "geo has " + std::to_string(record.geo.size()) + " rows for " +
                                        std::to_string(record.width) + " columns");
  }
  for (const auto& c : record.geo) validate_coordinate(c);
}

ThicknessTable extract_thicknesses(const EchogramRecord& record) {
  if (record.mask.size() != record.height * record.width || record.width == 0) {
    throw RecordRejected(record.id, "malformed mask");
  }
  std::vector<std::vector<std::size_t>> tops(record.width);
  for (std::size_t r = 0; r < record.height; ++r) {
    for (std::size_t c = 0; c < record.width; ++c) {
      if (record.is_top(r, c)) tops[c].push_back(r);
    }
  }
  for (std::size_t c = 0; c < record.width; ++c) {
    if (tops[c].size() < 2) {
      throw RecordRejected(record.id, "column " + std::to_string(c) + " has " + std::to_string(tops[c].size()) +
                                          " layer tops; at least 2 are needed for one thickness");
    }
  }
  const std::size_t count = tops[0].size();
  if (std::any_of(tops.begin(), tops.end(), [count](const auto& t) { return t.size() != count; })) {
    std::map<std::size_t, std::size_t> histogram;
    for (const auto& t : tops) ++histogram[t.size() - 1];
    std::string report;
    for (const auto& [layers, columns] : histogram) {
      if (!report.empty()) report += ", ";
      report += std::to_string(columns) + " columns with " + std::to_string(layers) + " layers";
    }
    throw RecordRejected(record.id, "inconsistent layer counts across columns (" + report + ")");
  }
  ThicknessTable table{record.width, count - 1, std::vector<int>(record.width * (count - 1))};
  for (std::size_t c = 0; c < record.width; ++c) {
    for (std::size_t k = 0; k + 1 < count; ++k) {
      table.at(c, k) = static_cast<int>(tops[c][k + 1] - tops[c][k]);
    }
  }
  return table;
}

LabeledRecord label_record(const EchogramRecord& record) {
  return LabeledRecord{record.id, record.geo, extract_thicknesses(record)};
}

std::vector<LabeledRecord> filter_usable(std::span<const LabeledRecord> records, std::size_t min_layers) {
  std::vector<LabeledRecord> kept;
  for (const auto& r : records) {
    if (r.thickness.layers >= min_layers) kept.push_back(r);
  }
  return kept;
}

SplitSizes split_sizes(std::size_t n) {
  const std::size_t fifth = (n + 2) / 5;
  return SplitSizes{n - 2 * fifth, fifth, fifth};
}

std::vector<SplitPlan> make_splits(std::span<const std::string> ids, std::uint64_t master_seed,
                                   std::size_t trials) {
  if (ids.size() < 5) {
    throw ConfigError("need at least 5 usable records to split 3:1:1, got " + std::to_string(ids.size()));
  }
  const SplitSizes sizes = split_sizes(ids.size());
  std::vector<SplitPlan> plans;
  for (std::size_t t = 0; t < trials; ++t) {
    std::vector<std::string> order(ids.begin(), ids.end());
    Rng rng(master_seed + t);
    rng.shuffle(std::span(order));
    SplitPlan plan;
    plan.trial = t;
    plan.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(sizes.train));
    plan.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(sizes.train),
                           order.begin() + static_cast<std::ptrdiff_t>(sizes.train + sizes.validation));
    plan.test.assign(order.begin() + static_cast<std::ptrdiff_t>(sizes.train + sizes.validation), order.end());
    plans.push_back(std::move(plan));
  }
  return plans;
}

EchogramRecord render_record(std::string id, const ThicknessTable& table, std::vector<GeoCoordinate> geo,
                             std::size_t surface_row, std::size_t bottom_margin) {
  std::size_t deepest = 0;
  for (std::size_t c = 0; c < table.columns; ++c) {
    std::size_t row = surface_row;
    for (std::size_t k = 0; k < table.layers; ++k) {
      if (table.at(c, k) < 1) throw DataError("render_record: thickness below 1 pixel");
      row += static_cast<std::size_t>(table.at(c, k));
    }
    deepest = std::max(deepest, row);
  }
  EchogramRecord rec;
  rec.id = std::move(id);
  rec.width = table.columns;
  rec.height = deepest + 1 + bottom_margin;
  rec.mask.assign(rec.height * rec.width, 0);
  rec.geo = std::move(geo);
  for (std::size_t c = 0; c < table.columns; ++c) {
    std::size_t row = surface_row;
    rec.mask[row * rec.width + c] = 1;
    for (std::size_t k = 0; k < table.layers; ++k) {
      row += static_cast<std::size_t>(table.at(c, k));
      rec.mask[row * rec.width + c] = 1;
    }
  }
  return rec;
}

GeoCoordinate destination_point(const GeoCoordinate& origin, double heading_deg, double distance_m) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  const double delta = distance_m / kEarthRadiusMeters;
  const double phi1 = origin.latitude * kDeg;
  const double lambda1 = origin.longitude * kDeg;
  const double theta = heading_deg * kDeg;
  const double sin_phi2 = std::sin(phi1) * std::cos(delta) + std::cos(phi1) * std::sin(delta) * std::cos(theta);
  const double phi2 = std::asin(std::clamp(sin_phi2, -1.0, 1.0));
  const double lambda2 = lambda1 + std::atan2(std::sin(theta) * std::sin(delta) * std::cos(phi1),
                                              std::cos(delta) - std::sin(phi1) * sin_phi2);
  double lon = std::remainder(lambda2 / kDeg, 360.0);
  return GeoCoordinate{phi2 / kDeg, lon, origin.elevation};
}

void SyntheticConfig::validate() const {
  if (records == 0) throw ConfigError("synthetic corpus needs at least one record");
  if (layers == 0 || short_layers == 0) throw ConfigError("synthetic records need at least one layer");
  if (short_records > records) throw ConfigError("short_records exceeds records");
  if (columns == 0) throw ConfigError("synthetic records need at least one column");
  if (origin_latitude < -90.0 || origin_latitude > 90.0 || origin_longitude < -180.0 ||
      origin_longitude > 180.0) {
    throw ConfigError("synthetic track origin out of range");
  }
  if (!(noise_px >= 0.0) || !(shock_px >= 0.0) || !(along_track_px >= 0.0)) {
    throw ConfigError("synthetic noise, shock and along-track scales must be non-negative");
  }
  if (!(persistence >= 0.0 && persistence < 1.0)) throw ConfigError("synthetic persistence must lie in [0, 1)");
}

std::string synthetic_record_id(const SyntheticConfig& config, std::size_t index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "synth_%llu_%05zu", static_cast<unsigned long long>(config.seed), index);
  return buf;
}

namespace {

std::vector<bool> short_record_mask(const SyntheticConfig& config) {
  std::vector<std::size_t> order(config.records);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(config.seed ^ 0x5eed5b0a7e11ULL);
  rng.shuffle(std::span(order));
  std::vector<bool> is_short(config.records, false);
  for (std::size_t i = 0; i < config.short_records; ++i) is_short[order[i]] = true;
  return is_short;
}

// Surface elevation along the flight line, meters.
double track_elevation(double along_track_m) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  return 2000.0 + 600.0 * std::sin(kTwoPi * along_track_m / 150000.0) +
         150.0 * std::sin(kTwoPi * along_track_m / 23000.0 + 1.0);
}

}  // namespace

SyntheticRecord synthesize_record(const SyntheticConfig& config, std::size_t index) {
  config.validate();
  if (index >= config.records) throw ConfigError("synthetic record index out of range");
  const bool is_short = short_record_mask(config)[index];
  const std::size_t layers = is_short ? config.short_layers : config.layers;
  const std::size_t n = config.columns;
  Rng rng(config.seed * 0x9E3779B97F4A7C15ULL + index * 0xBF58476D1CE4E5B9ULL + 1);

  // Consecutive frames of one flight line, 14.5 m per column.
  const GeoCoordinate origin{config.origin_latitude, config.origin_longitude, 0.0};
  std::vector<GeoCoordinate> geo(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double s = static_cast<double>(index * n + j) * kColumnFootprintMeters;
    geo[j] = destination_point(origin, config.heading_deg, s);
    geo[j].elevation = track_elevation(s);
  }

  // Thickness = record level + AR(1) yearly anomaly + along-track sinusoid
  // + elevation trend + per-pixel noise, compacted slightly with depth.
  const double level = rng.uniform(7.0, 13.0);
  const double amplitude = config.along_track_px * rng.uniform(0.5, 1.5);
  const double period = rng.uniform(0.75, 2.0) * static_cast<double>(n);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double persistence = config.persistence;
  const double shock = config.shock_px;
  const double noise = config.noise_px;
  constexpr double kElevationSlope = 0.5 / 100.0;  // pixels per meter

  std::vector<double> anomaly(layers);  // chronological, index 0 = oldest
  anomaly[0] = rng.normal() * shock / std::sqrt(1.0 - persistence * persistence);
  for (std::size_t y = 1; y < layers; ++y) anomaly[y] = persistence * anomaly[y - 1] + shock * rng.normal();

  ThicknessTable truth{n, layers, std::vector<int>(n * layers)};
  for (std::size_t k = 0; k < layers; ++k) {
    const std::size_t year = layers - 1 - k;
    const double compaction = 1.0 - 0.01 * static_cast<double>(k);
    for (std::size_t j = 0; j < n; ++j) {
      const double spatial = amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(j) / period + phase);
      const double trend = kElevationSlope * (geo[j].elevation - 2000.0);
      const double value = compaction * (level + anomaly[year] + spatial + trend) + noise * rng.normal();
      truth.at(j, k) = std::max(1, static_cast<int>(std::lround(value)));
    }
  }
  const std::size_t surface = 8 + static_cast<std::size_t>(rng.below(12));
  EchogramRecord record = render_record(synthetic_record_id(config, index), truth, std::move(geo), surface);
  return SyntheticRecord{std::move(record), std::move(truth)};
}

std::vector<EchogramRecord> generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  std::vector<EchogramRecord> corpus;
  corpus.reserve(config.records);
  for (std::size_t i = 0; i < config.records; ++i) corpus.push_back(synthesize_record(config, i).record);
  return corpus;
}

}  // namespace icelayer
