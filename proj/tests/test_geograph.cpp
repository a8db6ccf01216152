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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "icelayer/dataset.hpp"
#include "icelayer/errors.hpp"
#include "icelayer/geograph.hpp"
#include "icelayer/rng.hpp"

namespace icelayer {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Central angle from unit vectors; well conditioned at every separation.
double vector_angle(const GeoCoordinate& a, const GeoCoordinate& b) {
  const auto unit = [](const GeoCoordinate& c) {
    const double phi = c.latitude * kDeg, lam = c.longitude * kDeg;
    return std::array<double, 3>{std::cos(phi) * std::cos(lam), std::cos(phi) * std::sin(lam), std::sin(phi)};
  };
  const auto u = unit(a), v = unit(b);
  const std::array<double, 3> cross{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
  const double s = std::sqrt(cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]);
  return std::atan2(s, u[0] * v[0] + u[1] * v[1] + u[2] * v[2]);
}

TEST(Haversine, QuarterCircle) {
  EXPECT_NEAR(haversine_central_angle({0, 0, 0}, {0, 90, 0}), std::numbers::pi / 2, 1e-15);
  EXPECT_NEAR(haversine_central_angle({0, 0, 0}, {90, 0, 0}), std::numbers::pi / 2, 1e-15);
  EXPECT_NEAR(haversine_central_angle({0, 0, 0}, {0, 180, 0}), std::numbers::pi, 1e-15);
}

TEST(Haversine, AdjacentColumnsMatchVectorOracle) {
  const GeoCoordinate origin{69.5, -44.0, 0};
  for (double heading : {0.0, 35.0, 90.0, 211.0}) {
    const GeoCoordinate next = destination_point(origin, heading, kColumnFootprintMeters);
    const double theta = haversine_central_angle(origin, next);
    const double oracle = vector_angle(origin, next);
    EXPECT_NEAR(theta / oracle, 1.0, 1e-9) << heading;
    EXPECT_NEAR(theta * kEarthRadiusMeters, kColumnFootprintMeters, 1e-6);
  }
}

TEST(Haversine, SymmetricAndRandomAgreement) {
  Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    const GeoCoordinate a{rng.uniform(-89, 89), rng.uniform(-179, 179), 0};
    const GeoCoordinate b{rng.uniform(-89, 89), rng.uniform(-179, 179), 0};
    EXPECT_DOUBLE_EQ(haversine_central_angle(a, b), haversine_central_angle(b, a));
    EXPECT_NEAR(haversine_central_angle(a, b), vector_angle(a, b), 1e-12);
  }
}

TEST(EdgeWeight, StandardIsInverseCentralAngle) {
  const GeoCoordinate a{0, 0, 0}, b{0, 90, 0};
  EXPECT_NEAR(edge_weight(a, b), 2.0 / std::numbers::pi, 1e-15);
}

TEST(EdgeWeight, VerbatimModeDropsTheSquareRoot) {
  const GeoCoordinate a{0, 0, 0}, b{0, 60, 0};
  const double h = std::pow(std::sin(30.0 * kDeg), 2);  // hav(60 deg) = 0.25
  EdgeWeightOptions verbatim{DistanceMode::paper_verbatim};
  EXPECT_NEAR(edge_weight(a, b, verbatim), 1.0 / (2.0 * std::asin(h)), 1e-12);
  EXPECT_NEAR(edge_weight(a, b), 1.0 / (2.0 * std::asin(std::sqrt(h))), 1e-12);
}

TEST(EdgeWeight, CoincidentPointsAreCappedWithWarning) {
  Diagnostics diag;
  const GeoCoordinate a{70, -40, 1000};
  EXPECT_EQ(edge_weight(a, a, {}, &diag), 1e9);
  EXPECT_EQ(diag.warnings().size(), 1u);
  EdgeWeightOptions capped;
  capped.coincident_cap = 5.0;
  EXPECT_EQ(edge_weight(a, a, capped), 5.0);
}

TEST(Coordinates, OutOfRangeRejected) {
  EXPECT_THROW(validate_coordinate({91, 0, 0}), DataError);
  EXPECT_THROW(validate_coordinate({0, -181, 0}), DataError);
  EXPECT_THROW(validate_coordinate({0, 0, std::nan("")}), DataError);
  const std::vector<GeoCoordinate> bad{{0, 0, 0}, {95, 0, 0}};
  EXPECT_THROW(build_adjacency(bad), DataError);
}

TEST(DistanceMode, Parse) {
  EXPECT_EQ(parse_distance_mode("paper_verbatim"), DistanceMode::paper_verbatim);
  EXPECT_EQ(distance_mode_name(DistanceMode::standard), "standard");
  EXPECT_THROW(parse_distance_mode("euclid"), ConfigError);
}

std::vector<GeoCoordinate> track(std::size_t n, double lat = 72.0, double heading = 35.0) {
  std::vector<GeoCoordinate> geo;
  for (std::size_t j = 0; j < n; ++j) {
    geo.push_back(destination_point({lat, -40, 0}, heading, static_cast<double>(j) * kColumnFootprintMeters));
  }
  return geo;
}

TEST(Adjacency, SymmetricZeroDiagonalInverseDistance) {
  const auto geo = track(6);
  const AdjacencyMatrix adj = build_adjacency(geo);
  ASSERT_EQ(adj.size(), 6u);
  EXPECT_EQ(adj.state, AdjacencyState::raw);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(adj.weights(i, i), 0.0);
    for (std::size_t j = 0; j < 6; ++j) {
      EXPECT_EQ(adj.weights(i, j), adj.weights(j, i));
      if (i != j) {
        EXPECT_NEAR(adj.weights(i, j), 1.0 / vector_angle(geo[i], geo[j]), 1e-9 * adj.weights(i, j));
      }
    }
  }
  // Neighbours closer along the track weigh more.
  EXPECT_GT(adj.weights(0, 1), adj.weights(0, 2));
  EXPECT_NEAR(adj.weights(0, 1) / adj.weights(0, 2), 2.0, 1e-6);
}

TEST(Adjacency, CollectiveMinMaxSpansZeroToOne) {
  std::vector<AdjacencyMatrix> mats;
  for (double lat : {60.0, 70.0, 80.0}) mats.push_back(build_adjacency(track(5, lat)));
  const MinMaxStats stats = normalize_adjacency_collection(std::span(mats));
  EXPECT_FALSE(stats.degenerate);
  double lo = 1e300, hi = -1e300;
  for (const auto& m : mats) {
    EXPECT_EQ(m.state, AdjacencyState::minmax);
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 5; ++j) {
        if (i == j) {
          EXPECT_EQ(m.weights(i, j), 0.0);
          continue;
        }
        lo = std::min(lo, m.weights(i, j));
        hi = std::max(hi, m.weights(i, j));
      }
    }
  }
  EXPECT_EQ(lo, 0.0);
  EXPECT_EQ(hi, 1.0);
  EXPECT_THROW(normalize_adjacency_collection(std::span(mats)), ContractError);
}

TEST(Adjacency, DegenerateCollectionWarnsAndSetsOnes) {
  std::vector<AdjacencyMatrix> mats{build_adjacency(track(2))};
  Diagnostics diag;
  const MinMaxStats stats = normalize_adjacency_collection(std::span(mats), &diag);
  EXPECT_TRUE(stats.degenerate);
  EXPECT_FALSE(diag.empty());
  EXPECT_EQ(mats[0].weights(0, 1), 1.0);
  EXPECT_EQ(mats[0].weights(1, 1), 0.0);
}

ThicknessTable table(std::size_t columns, std::size_t layers, int base) {
  ThicknessTable t{columns, layers, std::vector<int>(columns * layers)};
  for (std::size_t c = 0; c < columns; ++c) {
    for (std::size_t k = 0; k < layers; ++k) t.at(c, k) = base + static_cast<int>(100 * k + c);
  }
  return t;
}

TEST(Assemble, LayerIndicesMapToYears) {
  const auto geo = track(3);
  const TemporalGraphSequence s = assemble_sequence("r", geo, table(3, 16, 0));
  ASSERT_EQ(s.graphs.size(), kFeatureYears);
  for (std::size_t g = 0; g < kFeatureYears; ++g) {
    EXPECT_EQ(s.graphs[g].year, 1998 + static_cast<int>(g));
    // 1998 is the deepest used layer (index 14), 2002 is layer index 10.
    EXPECT_EQ(s.graphs[g].features(2, kFeatureThickness), 100.0 * static_cast<double>(14 - g) + 2.0);
    EXPECT_EQ(s.graphs[g].features(1, kFeatureLatitude), geo[1].latitude);
    EXPECT_EQ(s.graphs[g].features(1, kFeatureLongitude), geo[1].longitude);
    EXPECT_EQ(s.graphs[g].features(1, kFeatureElevation), geo[1].elevation);
  }
  for (std::size_t j = 0; j < kTargetYears; ++j) {
    // Target column j is year 2003 + j, i.e. surface-first layer 9 - j.
    EXPECT_EQ(s.targets(0, j), 100.0 * static_cast<double>(9 - j));
  }
  EXPECT_EQ(s.adjacency.size(), 3u);
}

TEST(Assemble, TooFewLayersRejected) {
  EXPECT_THROW(assemble_sequence("r", track(3), table(3, 14, 0)), RecordRejected);
  EXPECT_NO_THROW(assemble_sequence("r", track(3), table(3, 15, 0)));
}

TEST(FeatureNormalization, GlobalMeanZeroUnitVariance) {
  std::vector<TemporalGraphSequence> seqs;
  for (int r = 0; r < 4; ++r) {
    seqs.push_back(assemble_sequence("r" + std::to_string(r), track(7, 65.0 + r), table(7, 15, 3 * r)));
  }
  normalize_features_collection(std::span(seqs));
  for (std::size_t d = 0; d < kNodeFeatures; ++d) {
    double sum = 0, sq = 0, n = 0;
    for (const auto& s : seqs) {
      for (const auto& g : s.graphs) {
        for (std::size_t i = 0; i < g.features.rows(); ++i) {
          sum += g.features(i, d);
          n += 1;
        }
      }
    }
    const double mean = sum / n;
    for (const auto& s : seqs) {
      for (const auto& g : s.graphs) {
        for (std::size_t i = 0; i < g.features.rows(); ++i) sq += std::pow(g.features(i, d) - mean, 2);
      }
    }
    if (d == kFeatureElevation) {
      EXPECT_EQ(sum, 0.0);  // constant elevation collapses to 0
      continue;
    }
    EXPECT_NEAR(mean, 0.0, 1e-9);
    EXPECT_NEAR(std::sqrt(sq / n), 1.0, 1e-9);
  }
  // Targets stay in raw pixels.
  EXPECT_EQ(seqs[0].targets(0, 0), 900.0);
}

TEST(FeatureNormalization, ConstantDimensionWarns) {
  std::vector<TemporalGraphSequence> seqs{assemble_sequence("r", track(4), table(4, 15, 0))};
  Diagnostics diag;
  const FeatureStats stats = normalize_features_collection(std::span(seqs), &diag);
  EXPECT_TRUE(stats.degenerate[kFeatureElevation]);
  EXPECT_FALSE(stats.degenerate[kFeatureThickness]);
  EXPECT_EQ(diag.warnings().size(), 1u);
}

}  // namespace
}  // namespace icelayer
