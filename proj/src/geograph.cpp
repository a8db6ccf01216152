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

#include "icelayer/geograph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "icelayer/dataset.hpp"

namespace icelayer {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double hav(double theta) {
  const double s = std::sin(theta / 2.0);
  return s * s;
}

// hav(dphi) + cos(phi_i) cos(phi_j) hav(dlambda)
double haversine_term(const GeoCoordinate& a, const GeoCoordinate& b) {
  const double phi1 = a.latitude * kDegToRad;
  const double phi2 = b.latitude * kDegToRad;
  const double dlambda = (b.longitude - a.longitude) * kDegToRad;
  return hav(phi2 - phi1) + std::cos(phi1) * std::cos(phi2) * hav(dlambda);
}

std::string describe(const GeoCoordinate& c) {
  return "(" + std::to_string(c.latitude) + ", " + std::to_string(c.longitude) + ")";
}

}  // namespace

void validate_coordinate(const GeoCoordinate& c) {
  if (!std::isfinite(c.latitude) || c.latitude < -90.0 || c.latitude > 90.0) {
    throw DataError("latitude out of range [-90, 90]: " + std::to_string(c.latitude));
  }
  if (!std::isfinite(c.longitude) || c.longitude < -180.0 || c.longitude > 180.0) {
    throw DataError("longitude out of range [-180, 180]: " + std::to_string(c.longitude));
  }
  if (!std::isfinite(c.elevation)) throw DataError("elevation is not finite");
}

DistanceMode parse_distance_mode(std::string_view name) {
  if (name == "standard") return DistanceMode::standard;
  if (name == "paper_verbatim") return DistanceMode::paper_verbatim;
  throw ConfigError("unknown distance mode '" + std::string(name) + "' (standard|paper_verbatim)");
}

std::string_view distance_mode_name(DistanceMode mode) {
  return mode == DistanceMode::standard ? "standard" : "paper_verbatim";
}

double haversine_central_angle(const GeoCoordinate& a, const GeoCoordinate& b) {
  const double h = std::clamp(haversine_term(a, b), 0.0, 1.0);
  return 2.0 * std::asin(std::sqrt(h));
}

double edge_weight(const GeoCoordinate& a, const GeoCoordinate& b, const EdgeWeightOptions& options,
                   Diagnostics* diag) {
  const bool coincident = a.latitude == b.latitude && a.longitude == b.longitude;
  double distance = 0.0;
  if (!coincident) {
    if (options.mode == DistanceMode::standard) {
      distance = haversine_central_angle(a, b);
    } else {
      const double arg = haversine_term(a, b);
      if (arg > 1.0) {
        throw DataError("paper_verbatim edge weight: arcsin argument " + std::to_string(arg) + " > 1 between " +
                        describe(a) + " and " + describe(b));
      }
      distance = 2.0 * std::asin(arg);
    }
  }
  if (coincident || distance == 0.0) {
    warn(diag, "coincident coordinates " + describe(a) + ": edge weight capped at " +
                   std::to_string(options.coincident_cap));
    return options.coincident_cap;
  }
  return std::min(1.0 / distance, options.coincident_cap);
}

AdjacencyMatrix build_adjacency(std::span<const GeoCoordinate> coords, const EdgeWeightOptions& options,
                                Diagnostics* diag) {
  const std::size_t n = coords.size();
  if (n == 0) throw DataError("build_adjacency: no coordinates");
  for (const auto& c : coords) validate_coordinate(c);
  AdjacencyMatrix adj{Tensor(Shape{n, n}), AdjacencyState::raw};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double w = 0.0;
      try {
        w = edge_weight(coords[i], coords[j], options, diag);
      } catch (const DataError& e) {
        throw DataError("nodes " + std::to_string(i) + " and " + std::to_string(j) + ": " + e.what());
      }
      adj.weights(i, j) = w;
      adj.weights(j, i) = w;
    }
  }
  return adj;
}

MinMaxStats compute_adjacency_minmax(std::span<const AdjacencyMatrix* const> matrices, Diagnostics* diag) {
  if (matrices.empty()) throw ConfigError("adjacency normalization over an empty collection");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const AdjacencyMatrix* m : matrices) {
    if (m->state != AdjacencyState::raw) throw ContractError("adjacency matrix already normalized");
    const std::size_t n = m->size();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        lo = std::min(lo, m->weights(i, j));
        hi = std::max(hi, m->weights(i, j));
      }
    }
  }
  MinMaxStats stats;
  if (!(hi > lo)) {
    stats.degenerate = true;
    stats.min = std::isfinite(lo) ? lo : 0.0;
    stats.max = std::isfinite(hi) ? hi : 0.0;
    warn(diag, "degenerate adjacency collection (max == min); off-diagonal weights set to 1");
  } else {
    stats.min = lo;
    stats.max = hi;
  }
  return stats;
}

void apply_adjacency_minmax(AdjacencyMatrix& matrix, const MinMaxStats& stats) {
  if (matrix.state != AdjacencyState::raw) throw ContractError("adjacency matrix already normalized");
  const std::size_t n = matrix.size();
  const double range = stats.max - stats.min;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double& w = matrix.weights(i, j);
      if (i == j) {
        w = 0.0;
      } else if (stats.degenerate) {
        w = 1.0;
      } else {
        w = (w - stats.min) / range;
      }
    }
  }
  matrix.state = AdjacencyState::minmax;
}

MinMaxStats normalize_adjacency_collection(std::span<AdjacencyMatrix> matrices, Diagnostics* diag) {
  std::vector<const AdjacencyMatrix*> ptrs;
  for (const auto& m : matrices) ptrs.push_back(&m);
  const MinMaxStats stats = compute_adjacency_minmax(ptrs, diag);
  for (auto& m : matrices) apply_adjacency_minmax(m, stats);
  return stats;
}

MinMaxStats normalize_adjacency_collection(std::span<TemporalGraphSequence> sequences, Diagnostics* diag) {
  std::vector<const AdjacencyMatrix*> ptrs;
  for (const auto& s : sequences) ptrs.push_back(&s.adjacency);
  const MinMaxStats stats = compute_adjacency_minmax(ptrs, diag);
  for (auto& s : sequences) apply_adjacency_minmax(s.adjacency, stats);
  return stats;
}

FeatureStats compute_feature_stats(std::span<const TemporalGraphSequence* const> sequences, Diagnostics* diag) {
  if (sequences.empty()) throw ConfigError("feature normalization over an empty collection");
  FeatureStats stats;
  std::array<double, kNodeFeatures> total{};
  double count = 0.0;
  for (const auto* s : sequences) {
    for (const auto& g : s->graphs) {
      const std::size_t n = g.features.rows();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < kNodeFeatures; ++d) total[d] += g.features(i, d);
      }
      count += static_cast<double>(n);
    }
  }
  if (count == 0.0) throw ConfigError("feature normalization over graphs without nodes");
  for (std::size_t d = 0; d < kNodeFeatures; ++d) stats.mean[d] = total[d] / count;
  std::array<double, kNodeFeatures> sq{};
  for (const auto* s : sequences) {
    for (const auto& g : s->graphs) {
      const std::size_t n = g.features.rows();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < kNodeFeatures; ++d) {
          const double dev = g.features(i, d) - stats.mean[d];
          sq[d] += dev * dev;
        }
      }
    }
  }
  static constexpr const char* kNames[] = {"latitude", "longitude", "elevation", "thickness"};
  for (std::size_t d = 0; d < kNodeFeatures; ++d) {
    stats.stddev[d] = std::sqrt(sq[d] / count);
    if (stats.stddev[d] == 0.0) {
      stats.degenerate[d] = true;
      warn(diag, std::string("feature '") + kNames[d] + "' is constant over the collection; set to 0");
    }
  }
  return stats;
}

void apply_feature_stats(TemporalGraphSequence& sequence, const FeatureStats& stats) {
  for (auto& g : sequence.graphs) {
    const std::size_t n = g.features.rows();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < kNodeFeatures; ++d) {
        double& x = g.features(i, d);
        x = stats.degenerate[d] ? 0.0 : (x - stats.mean[d]) / stats.stddev[d];
      }
    }
  }
}

FeatureStats normalize_features_collection(std::span<TemporalGraphSequence> sequences, Diagnostics* diag) {
  std::vector<const TemporalGraphSequence*> ptrs;
  for (const auto& s : sequences) ptrs.push_back(&s);
  const FeatureStats stats = compute_feature_stats(ptrs, diag);
  for (auto& s : sequences) apply_feature_stats(s, stats);
  return stats;
}

TemporalGraphSequence assemble_sequence(const EchogramRecord& record, const ThicknessTable& thicknesses,
                                        const EdgeWeightOptions& options, Diagnostics* diag) {
  return assemble_sequence(record.id, record.geo, thicknesses, options, diag);
}

TemporalGraphSequence assemble_sequence(std::string_view record_id, std::span<const GeoCoordinate> geo,
                                        const ThicknessTable& thicknesses, const EdgeWeightOptions& options,
                                        Diagnostics* diag) {
  const std::string id(record_id);
  if (thicknesses.layers < kRequiredLayers) {
    throw RecordRejected(id, "has " + std::to_string(thicknesses.layers) + " layers, needs at least " +
                                        std::to_string(kRequiredLayers));
  }
  const std::size_t n = geo.size();
  if (thicknesses.columns != n) {
    throw RecordRejected(id, "thickness table has " + std::to_string(thicknesses.columns) +
                                        " columns but geo has " + std::to_string(n));
  }
  TemporalGraphSequence seq;
  seq.record_id = id;
  seq.coordinates.assign(geo.begin(), geo.end());
  seq.adjacency = build_adjacency(geo, options, diag);

  // Surface-first layer k: k in [0, 10) are targets (k = 9 is 2003), k in
  // [10, 15) are features (k = 14 is 1998).
  for (std::size_t g = 0; g < kFeatureYears; ++g) {
    const std::size_t layer = kTargetYears + (kFeatureYears - 1 - g);
    FeatureGraph graph{kFirstFeatureYear + static_cast<int>(g), Tensor(Shape{n, kNodeFeatures})};
    for (std::size_t i = 0; i < n; ++i) {
      graph.features(i, kFeatureLatitude) = geo[i].latitude;
      graph.features(i, kFeatureLongitude) = geo[i].longitude;
      graph.features(i, kFeatureElevation) = geo[i].elevation;
      graph.features(i, kFeatureThickness) = thicknesses.at(i, layer);
    }
    seq.graphs.push_back(std::move(graph));
  }
  seq.targets = Tensor(Shape{n, kTargetYears});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t y = 0; y < kTargetYears; ++y) seq.targets(i, y) = thicknesses.at(i, kTargetYears - 1 - y);
  }
  return seq;
}

}  // namespace icelayer
