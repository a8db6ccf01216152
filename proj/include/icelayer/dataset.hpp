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
#include <vector>

#include "icelayer/errors.hpp"
#include "icelayer/geograph.hpp"

namespace icelayer {

inline constexpr std::size_t kEchogramColumns = 256;
inline constexpr double kCentimetersPerPixel = 4.0;
inline constexpr double kColumnFootprintMeters = 14.5;
inline constexpr double kEarthRadiusMeters = 6371000.0;
inline constexpr std::size_t kTrials = 5;

// One labeled radar frame: a height x width binary mask (1 marks the top pixel
// of a layer) and one coordinate per column.
struct EchogramRecord {
  std::string id;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> mask;  // row-major, 0 or 1
  std::vector<GeoCoordinate> geo;

  bool is_top(std::size_t row, std::size_t col) const { return mask[row * width + col] != 0; }
};

// Checks mask/geo extents. Real corpora use expected_columns = 256.
void validate_record(const EchogramRecord& record, std::size_t expected_columns = kEchogramColumns);

// Per-column layer thicknesses in pixels, surface first. Every column holds
// the same number of layers.
struct ThicknessTable {
  std::size_t columns = 0;
  std::size_t layers = 0;
  std::vector<int> values;  // values[col * layers + layer]

  int at(std::size_t col, std::size_t layer) const { return values[col * layers + layer]; }
  int& at(std::size_t col, std::size_t layer) { return values[col * layers + layer]; }

  bool operator==(const ThicknessTable&) const = default;
};

class RecordRejected : public DataError {
 public:
  RecordRejected(std::string record_id, std::string reason)
      : DataError("record '" + record_id + "' rejected: " + reason),
        record_id_(std::move(record_id)),
        reason_(std::move(reason)) {}

  const std::string& record_id() const { return record_id_; }
  const std::string& reason() const { return reason_; }

 private:
  std::string record_id_;
  std::string reason_;
};

// Layer-top rows per column, ascending; thickness k = top(k+1) - top(k). The
// deepest top only closes the layer above it.
ThicknessTable extract_thicknesses(const EchogramRecord& record);

struct LabeledRecord {
  std::string id;
  std::vector<GeoCoordinate> geo;
  ThicknessTable thickness;
};

LabeledRecord label_record(const EchogramRecord& record);

std::vector<LabeledRecord> filter_usable(std::span<const LabeledRecord> records,
                                         std::size_t min_layers = kRequiredLayers);

struct SplitSizes {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};

// 3:1:1 with validation = test = round(n / 5) and train taking the rest.
SplitSizes split_sizes(std::size_t n);

struct SplitPlan {
  std::size_t trial = 0;
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
};

// Trial t permutes ids with seed master_seed + t and cuts train | val | test.
std::vector<SplitPlan> make_splits(std::span<const std::string> ids, std::uint64_t master_seed,
                                   std::size_t trials = kTrials);

// Inverse of extract_thicknesses: tops at surface_row and the cumulative sums
// below it, bottom_margin blank rows under the deepest top.
EchogramRecord render_record(std::string id, const ThicknessTable& table, std::vector<GeoCoordinate> geo,
                             std::size_t surface_row = 8, std::size_t bottom_margin = 4);

// Point reached travelling `distance_m` along a great circle.
GeoCoordinate destination_point(const GeoCoordinate& origin, double heading_deg, double distance_m);

struct SyntheticConfig {
  std::size_t records = 20;
  std::size_t layers = 16;
  // Records drawn with `short_layers` layers instead (to exercise filtering).
  std::size_t short_records = 0;
  std::size_t short_layers = 12;
  std::size_t columns = kEchogramColumns;
  double origin_latitude = 72.0;
  double origin_longitude = -40.0;
  double heading_deg = 35.0;
  // Thickness model, pixels: per-column noise, yearly AR(1) anomaly shared by
  // the whole record, and the scale of the smooth along-track variation.
  double noise_px = 1.5;
  double persistence = 0.8;
  double shock_px = 1.0;
  double along_track_px = 2.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticRecord {
  EchogramRecord record;
  ThicknessTable truth;
};

std::string synthetic_record_id(const SyntheticConfig& config, std::size_t index);

// Record `index` of the corpus; a pure function of (config, index).
SyntheticRecord synthesize_record(const SyntheticConfig& config, std::size_t index);

std::vector<EchogramRecord> generate_synthetic(const SyntheticConfig& config);

}  // namespace icelayer
