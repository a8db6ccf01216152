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
#include <set>

#include "icelayer/dataset.hpp"
#include "icelayer/errors.hpp"
#include "icelayer/geograph.hpp"

namespace icelayer {
namespace {

EchogramRecord mask_from_tops(const std::vector<std::vector<std::size_t>>& tops, std::size_t height) {
  EchogramRecord r;
  r.id = "hand";
  r.height = height;
  r.width = tops.size();
  r.mask.assign(height * r.width, 0);
  for (std::size_t c = 0; c < tops.size(); ++c) {
    for (std::size_t row : tops[c]) r.mask[row * r.width + c] = 1;
  }
  r.geo.assign(r.width, GeoCoordinate{70, -40, 2000});
  return r;
}

TEST(Extract, HandTracedThreeColumnMask) {
  // col 0 tops at rows 1, 4, 8; col 1 at 0, 2, 7; col 2 at 2, 3, 9.
  const EchogramRecord r = mask_from_tops({{1, 4, 8}, {0, 2, 7}, {2, 3, 9}}, 10);
  const ThicknessTable t = extract_thicknesses(r);
  EXPECT_EQ(t.columns, 3u);
  EXPECT_EQ(t.layers, 2u);
  EXPECT_EQ(t.values, (std::vector<int>{3, 4, 2, 5, 1, 6}));
}

TEST(Extract, InconsistentLayerCountsRejectedWithHistogram) {
  const EchogramRecord r = mask_from_tops({{1, 4, 8}, {0, 2}, {2, 3, 9}}, 10);
  try {
    extract_thicknesses(r);
    FAIL() << "expected RecordRejected";
  } catch (const RecordRejected& e) {
    EXPECT_EQ(e.record_id(), "hand");
    EXPECT_NE(e.reason().find("2 columns with 2 layers"), std::string::npos) << e.reason();
    EXPECT_NE(e.reason().find("1 columns with 1 layers"), std::string::npos) << e.reason();
  }
}

TEST(Extract, ColumnWithoutTwoTopsRejected) {
  EXPECT_THROW(extract_thicknesses(mask_from_tops({{1, 4}, {3}}, 6)), RecordRejected);
}

TEST(Extract, RoundTripOnFiftySyntheticRecords) {
  SyntheticConfig cfg;
  cfg.records = 50;
  cfg.columns = 32;
  cfg.seed = 9;
  for (std::size_t i = 0; i < cfg.records; ++i) {
    const SyntheticRecord s = synthesize_record(cfg, i);
    EXPECT_EQ(extract_thicknesses(s.record), s.truth) << i;
    const EchogramRecord again = render_record(s.record.id, s.truth, s.record.geo, 3, 0);
    EXPECT_EQ(extract_thicknesses(again), s.truth) << i;
  }
}

TEST(Render, LayoutMatchesTable) {
  ThicknessTable t{2, 2, {3, 1, 2, 4}};
  const EchogramRecord r = render_record("x", t, {{70, -40, 0}, {70, -40.001, 0}}, 5, 2);
  // Tops at 5, 8, 9 and 5, 7, 11; height = deepest top + margin + 1.
  EXPECT_EQ(r.height, 14u);
  EXPECT_TRUE(r.is_top(5, 0));
  EXPECT_TRUE(r.is_top(8, 0));
  EXPECT_TRUE(r.is_top(9, 0));
  EXPECT_TRUE(r.is_top(7, 1));
  EXPECT_TRUE(r.is_top(11, 1));
  EXPECT_EQ(std::count(r.mask.begin(), r.mask.end(), 1), 6);
}

TEST(Validate, ExtentMismatchesRejected) {
  EchogramRecord r = mask_from_tops({{1, 3}, {1, 3}}, 5);
  EXPECT_NO_THROW(validate_record(r, 2));
  EXPECT_THROW(validate_record(r, 256), RecordRejected);
  r.geo.pop_back();
  EXPECT_THROW(validate_record(r, 2), RecordRejected);
}

LabeledRecord labeled(const std::string& id, std::size_t layers) {
  return LabeledRecord{id, {}, ThicknessTable{1, layers, std::vector<int>(layers, 5)}};
}

TEST(Filter, KeepsRecordsWithFifteenOrMoreLayers) {
  const std::vector<LabeledRecord> rs{labeled("a", 14), labeled("b", 15), labeled("c", 30), labeled("d", 2)};
  const auto kept = filter_usable(rs);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].id, "b");
  EXPECT_EQ(kept[1].id, "c");
}

TEST(Splits, SizesFollowThreeOneOne) {
  const SplitSizes s = split_sizes(1254);
  EXPECT_EQ(s.train, 752u);
  EXPECT_EQ(s.validation, 251u);
  EXPECT_EQ(s.test, 251u);
  const SplitSizes small = split_sizes(7);
  EXPECT_EQ(small.train + small.validation + small.test, 7u);
  EXPECT_EQ(small.validation, 1u);
  // A fifth rounds to nearest: 1.6 -> 2.
  EXPECT_EQ(split_sizes(8).validation, 2u);
  EXPECT_EQ(split_sizes(8).train, 4u);
  EXPECT_EQ(split_sizes(5).train, 3u);
}

class SplitProperty : public ::testing::TestWithParam<std::size_t> {};

TEST_P(SplitProperty, DisjointExhaustiveDeterministic) {
  const std::size_t n = GetParam();
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("id" + std::to_string(i));
  const auto plans = make_splits(ids, 123);
  ASSERT_EQ(plans.size(), kTrials);
  const auto again = make_splits(ids, 123);
  const SplitSizes sizes = split_sizes(n);
  for (std::size_t t = 0; t < kTrials; ++t) {
    const auto& p = plans[t];
    EXPECT_EQ(p.trial, t);
    EXPECT_EQ(p.train.size(), sizes.train);
    EXPECT_EQ(p.validation.size(), sizes.validation);
    EXPECT_EQ(p.test.size(), sizes.test);
    std::set<std::string> all(p.train.begin(), p.train.end());
    all.insert(p.validation.begin(), p.validation.end());
    all.insert(p.test.begin(), p.test.end());
    EXPECT_EQ(all.size(), n);
    EXPECT_EQ(p.train, again[t].train);
    EXPECT_EQ(p.test, again[t].test);
  }
  EXPECT_NE(plans[0].train, plans[1].train);
}

INSTANTIATE_TEST_SUITE_P(Sizes, SplitProperty, ::testing::Values(5, 6, 23, 200, 1254));

TEST(Splits, TooFewRecordsRejected) {
  const std::vector<std::string> ids{"a", "b", "c", "d"};
  EXPECT_THROW(make_splits(ids, 0), ConfigError);
}

TEST(Synthetic, DeterministicAndComplete) {
  SyntheticConfig cfg;
  cfg.records = 6;
  cfg.columns = 16;
  cfg.short_records = 2;
  cfg.seed = 4;
  const auto a = generate_synthetic(cfg);
  const auto b = generate_synthetic(cfg);
  ASSERT_EQ(a.size(), 6u);
  std::size_t short_count = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, synthetic_record_id(cfg, i));
    EXPECT_EQ(a[i].mask, b[i].mask);
    EXPECT_EQ(a[i].geo, b[i].geo);
    EXPECT_NO_THROW(validate_record(a[i], 16));
    const auto t = extract_thicknesses(a[i]);
    if (t.layers == cfg.short_layers) ++short_count;
    else EXPECT_EQ(t.layers, cfg.layers);
    for (int v : t.values) EXPECT_GE(v, 1);
  }
  EXPECT_EQ(short_count, 2u);
  EXPECT_EQ(synthetic_record_id(cfg, 3), "synth_4_00003");
}

TEST(Synthetic, ColumnsAreConsecutiveFramesOfOneFlightLine) {
  SyntheticConfig cfg;
  cfg.records = 2;
  cfg.columns = 8;
  const auto rs = generate_synthetic(cfg);
  const auto step = [](const GeoCoordinate& a, const GeoCoordinate& b) {
    return haversine_central_angle(a, b) * kEarthRadiusMeters;
  };
  for (std::size_t j = 0; j + 1 < 8; ++j) EXPECT_NEAR(step(rs[0].geo[j], rs[0].geo[j + 1]), 14.5, 1e-6);
  EXPECT_NEAR(step(rs[0].geo[7], rs[1].geo[0]), 14.5, 1e-6);
}

TEST(Synthetic, InvalidConfigRejected) {
  SyntheticConfig cfg;
  cfg.records = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.records = 2;
  cfg.short_records = 3;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.short_records = 0;
  cfg.persistence = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

}  // namespace
}  // namespace icelayer
