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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "icelayer/errors.hpp"
#include "icelayer/tensor.hpp"

namespace icelayer {

struct EchogramRecord;
struct ThicknessTable;

// Node feature layout.
inline constexpr std::size_t kFeatureLatitude = 0;
inline constexpr std::size_t kFeatureLongitude = 1;
inline constexpr std::size_t kFeatureElevation = 2;
inline constexpr std::size_t kFeatureThickness = 3;
inline constexpr std::size_t kNodeFeatures = 4;

inline constexpr std::size_t kFeatureYears = 5;   // 1998..2002
inline constexpr std::size_t kTargetYears = 10;   // 2003..2012
inline constexpr int kFirstFeatureYear = 1998;
inline constexpr int kFirstTargetYear = 2003;
inline constexpr std::size_t kRequiredLayers = kFeatureYears + kTargetYears;

// Degrees / degrees / meters.
struct GeoCoordinate {
  double latitude = 0.0;
  double longitude = 0.0;
  double elevation = 0.0;

  bool operator==(const GeoCoordinate&) const = default;
};

// Throws DataError when latitude or longitude are outside their ranges.
void validate_coordinate(const GeoCoordinate& c);

enum class DistanceMode {
  standard,        // 1 / (2 asin(sqrt(hav)))
  paper_verbatim,  // 1 / (2 asin(hav)), no square root
};

DistanceMode parse_distance_mode(std::string_view name);
std::string_view distance_mode_name(DistanceMode mode);

struct EdgeWeightOptions {
  DistanceMode mode = DistanceMode::standard;
  double coincident_cap = 1e9;
};

// Central angle in radians on the unit sphere, in [0, pi].
double haversine_central_angle(const GeoCoordinate& a, const GeoCoordinate& b);

// Inverse-distance edge weight. Coincident points get options.coincident_cap
// and a warning. In paper_verbatim mode an arcsin argument above 1 raises
// DataError.
double edge_weight(const GeoCoordinate& a, const GeoCoordinate& b, const EdgeWeightOptions& options = {},
                   Diagnostics* diag = nullptr);

enum class AdjacencyState { raw, minmax };

// Dense symmetric weight matrix with zero diagonal.
struct AdjacencyMatrix {
  Tensor weights;
  AdjacencyState state = AdjacencyState::raw;

  std::size_t size() const { return weights.empty() ? 0 : weights.rows(); }
};

AdjacencyMatrix build_adjacency(std::span<const GeoCoordinate> coords, const EdgeWeightOptions& options = {},
                                Diagnostics* diag = nullptr);

struct MinMaxStats {
  double min = 0.0;
  double max = 0.0;
  bool degenerate = false;
};

// Global off-diagonal extremes over a collection of raw matrices.
MinMaxStats compute_adjacency_minmax(std::span<const AdjacencyMatrix* const> matrices, Diagnostics* diag = nullptr);
// w' = (w - min) / (max - min) off the diagonal; degenerate stats set every
// off-diagonal weight to 1.
void apply_adjacency_minmax(AdjacencyMatrix& matrix, const MinMaxStats& stats);
MinMaxStats normalize_adjacency_collection(std::span<AdjacencyMatrix> matrices, Diagnostics* diag = nullptr);

struct FeatureGraph {
  int year = 0;
  Tensor features;  // N x kNodeFeatures
};

// Five feature graphs (1998 -> 2002) over one shared adjacency, plus raw pixel
// targets with column j holding year 2003 + j.
struct TemporalGraphSequence {
  std::string record_id;
  std::vector<FeatureGraph> graphs;
  AdjacencyMatrix adjacency;
  Tensor targets;  // N x kTargetYears
  std::vector<GeoCoordinate> coordinates;

  std::size_t node_count() const { return coordinates.size(); }
};

MinMaxStats normalize_adjacency_collection(std::span<TemporalGraphSequence> sequences, Diagnostics* diag = nullptr);

struct FeatureStats {
  std::array<double, kNodeFeatures> mean{};
  std::array<double, kNodeFeatures> stddev{};
  std::array<bool, kNodeFeatures> degenerate{};
};

// Per-dimension mean and population standard deviation over every node of
// every feature graph in `sequences`.
FeatureStats compute_feature_stats(std::span<const TemporalGraphSequence* const> sequences,
                                   Diagnostics* diag = nullptr);
// Degenerate dimensions (sigma == 0) become 0. Targets are not touched.
void apply_feature_stats(TemporalGraphSequence& sequence, const FeatureStats& stats);
FeatureStats normalize_features_collection(std::span<TemporalGraphSequence> sequences, Diagnostics* diag = nullptr);

// Needs at least 15 layers per column; shallowest ten become targets and the
// next five become the 1998..2002 feature graphs.
TemporalGraphSequence assemble_sequence(const EchogramRecord& record, const ThicknessTable& thicknesses,
                                        const EdgeWeightOptions& options = {}, Diagnostics* diag = nullptr);
TemporalGraphSequence assemble_sequence(std::string_view record_id, std::span<const GeoCoordinate> geo,
                                        const ThicknessTable& thicknesses, const EdgeWeightOptions& options = {},
                                        Diagnostics* diag = nullptr);

}  // namespace icelayer
