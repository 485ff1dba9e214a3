/*
 * Copyright 2026 The RLT Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "rlt/common.h"
#include "rlt/denoise.h"
#include "rlt/synthgen.h"

namespace rlt {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> Lattice(double delta, double offset, const std::vector<int>& ks) {
  std::vector<double> v;
  for (int k : ks) v.push_back(offset + k * delta);
  return v;
}

TEST(DetectDeltaTest, HandExample) {
  const std::vector<double> v = {0.0, 0.0385, 0.077, 0.1925, 0.1155, 0.0385};
  const DeltaEstimate est = DetectDelta(v, kDefaultLatticeTolerance, "x");
  ASSERT_TRUE(est.detected);
  EXPECT_NEAR(est.delta, 0.0385, 1e-12);
  EXPECT_EQ(est.n_unique, 5u);
  const auto q = Quantize(v, est);
  EXPECT_EQ(q[3], 5);
  EXPECT_EQ(q[0], 0);
  EXPECT_EQ(q[4], 3);
}

TEST(DetectDeltaTest, RecoversPlantedStepWithOffset) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> k(0, 40);
  std::vector<int> ks(5000);
  for (auto& x : ks) x = k(rng);
  const std::vector<double> v = Lattice(0.5711, 3.25, ks);
  const DeltaEstimate est = DetectDelta(v);
  ASSERT_TRUE(est.detected);
  EXPECT_NEAR(est.delta / 0.5711, 1.0, 1e-6);
  EXPECT_LE(est.max_abs_residual, kDefaultLatticeTolerance * est.delta);
  const int k_min = *std::min_element(ks.begin(), ks.end());
  const auto q = Quantize(v, est, QuantizeOrigin::kMin);
  for (std::size_t i = 0; i < ks.size(); ++i) ASSERT_EQ(q[i], ks[i] - k_min);
}

TEST(DetectDeltaTest, ContinuousNoiseNotDetected) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  std::vector<double> v(2000);
  for (auto& x : v) x = normal(rng);
  const DeltaEstimate est = DetectDelta(v);
  EXPECT_FALSE(est.detected);
  EXPECT_THROW(Quantize(v, est), Error);
}

TEST(DetectDeltaTest, PerturbationBeyondToleranceRejected) {
  std::vector<double> v = Lattice(0.1, 0.0, {0, 1, 2, 3, 4, 5, 6});
  EXPECT_TRUE(DetectDelta(v).detected);
  v.back() += 0.1 * 0.01;
  EXPECT_FALSE(DetectDelta(v).detected);
}

TEST(DetectDeltaTest, FewUniqueValuesAndMissing) {
  EXPECT_FALSE(DetectDelta(std::vector<double>{}).detected);
  EXPECT_FALSE(DetectDelta(std::vector<double>{1.0, 2.0, 1.0}).detected);
  const std::vector<double> v = {kNaN, 0.0, 0.25, kNaN, 0.75, 1.0};
  const DeltaEstimate est = DetectDelta(v);
  ASSERT_TRUE(est.detected);
  EXPECT_NEAR(est.delta, 0.25, 1e-12);
  const auto q = Quantize(v, est);
  EXPECT_FALSE(q[0].has_value());
  EXPECT_FALSE(q[3].has_value());
  EXPECT_EQ(q[4], 3);
}

TEST(DetectDeltaTest, ScaleInvariance) {
  const std::vector<int> ks = {0, 2, 3, 7, 11, 12};
  const DeltaEstimate a = DetectDelta(Lattice(0.0385, 0, ks));
  const DeltaEstimate b = DetectDelta(Lattice(0.0385 * 1000, 0, ks));
  ASSERT_TRUE(a.detected && b.detected);
  EXPECT_NEAR(b.delta / a.delta, 1000.0, 1e-9);
  EXPECT_EQ(Quantize(Lattice(0.0385, 0, ks), a), Quantize(Lattice(0.0385 * 1000, 0, ks), b));
}

TEST(QuantizeTest, OriginParsingAndColumns) {
  EXPECT_EQ(ParseQuantizeOrigin("zero"), QuantizeOrigin::kZero);
  EXPECT_EQ(ParseQuantizeOrigin("vmin"), QuantizeOrigin::kMin);
  EXPECT_THROW(ParseQuantizeOrigin("middle"), Error);
  const std::vector<std::optional<std::int64_t>> q = {1, std::nullopt, 3};
  const Column cont = QuantizedColumn("x", q, false);
  EXPECT_EQ(cont.role(), ColumnRole::kContinuous);
  EXPECT_EQ(cont.NumericValue(2), 3.0);
  EXPECT_TRUE(cont.IsMissing(1));
  const Column cat = QuantizedColumn("x", q, true);
  EXPECT_EQ(cat.role(), ColumnRole::kCategorical);
  EXPECT_EQ(cat.Token(0), "1");
  EXPECT_TRUE(cat.IsMissing(1));
}

TEST(GroupByDeltaTest, GroupsWithinRelativeTolerance) {
  std::vector<DeltaEstimate> est(4);
  est[0] = {"a", 0.0385, 0, 10, 0, true};
  est[1] = {"b", 0.5711, 0, 10, 0, true};
  est[2] = {"c", 0.0386, 0, 10, 0, true};
  est[3] = {"d", 0.0, 0, 10, 0, false};
  const auto groups = GroupByDelta(est);
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0], (std::vector<std::string>{"a", "c"}));
  EXPECT_EQ(groups[1], (std::vector<std::string>{"b"}));
}

TEST(DenoiseTableTest, SyntheticBenchmarkRecoversTruth) {
  SynthSpec spec = SynthSpec::Default();
  spec.n_rows_per_day = 1000;
  spec.cont_missing_rate = 0.05;
  const SynthResult data = Generate(spec);
  const DenoiseResult result = DenoiseTable(data.table, DenoiseOptions{});
  EXPECT_EQ(result.estimates.size(), static_cast<std::size_t>(spec.n_cont));
  for (const auto& est : result.estimates) {
    const auto delta = data.truth.deltas.find(est.feature);
    if (delta == data.truth.deltas.end()) {
      EXPECT_FALSE(est.detected) << est.feature;
      EXPECT_EQ(result.table.column(est.feature), data.table.column(est.feature));
      continue;
    }
    ASSERT_TRUE(est.detected) << est.feature;
    EXPECT_NEAR(est.delta / delta->second, 1.0, 1e-4) << est.feature;
    const Column& q = result.table.column(est.feature);
    const auto& ks = data.truth.multipliers.at(est.feature);
    for (std::size_t r = 0; r < q.size(); ++r) {
      if (data.table.column(est.feature).IsMissing(r)) {
        ASSERT_TRUE(q.IsMissing(r));
      } else {
        ASSERT_EQ(q.NumericValue(r), static_cast<double>(ks[r])) << est.feature << " row " << r;
      }
    }
  }
  EXPECT_EQ(result.table.n_rows(), data.table.n_rows());
  EXPECT_EQ(result.table.n_cols(), data.table.n_cols());
  const auto json = result.ToJson();
  EXPECT_TRUE(json.contains("estimates"));
  EXPECT_TRUE(json.contains("delta_groups"));
}

TEST(DenoiseTableTest, ExplicitFeatureListAndErrors) {
  const Column x = Column::Continuous("x", Lattice(0.5, 0, {0, 1, 2, 3}));
  const Column y = Column::Continuous("y", Lattice(0.25, 0, {0, 1, 2, 3}));
  const Table table = Table::FromColumns({x, y});
  DenoiseOptions options;
  options.features = {"y"};
  options.as_categorical = true;
  const DenoiseResult result = DenoiseTable(table, options);
  ASSERT_EQ(result.estimates.size(), 1u);
  EXPECT_EQ(result.table.column("x"), x);
  EXPECT_EQ(result.table.column("y").role(), ColumnRole::kCategorical);
  options.features = {"missing"};
  EXPECT_THROW(DenoiseTable(table, options), Error);
}

TEST(CorrelationTest, DiagonalSymmetryAndCsvShape) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  std::vector<double> a(500), b(500), c(500);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = normal(rng);
    b[i] = a[i] + 0.5 * normal(rng);
    c[i] = i % 7 == 0 ? kNaN : normal(rng);
  }
  const Table table = Table::FromColumns(
      {Column::Continuous("a", a), Column::Continuous("b", b), Column::Continuous("c", c)});
  const CorrelationMatrix m = ComputeCorrelation(table, {"a", "b", "c"});
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(m.at(i, i), 1.0);
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_DOUBLE_EQ(m.at(i, j), m.at(j, i));
      EXPECT_LE(std::abs(m.at(i, j)), 1.0 + 1e-12);
    }
  }
  EXPECT_GT(m.at(0, 1), 0.8);
  const std::string csv = m.ToCsv();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "feature,a,b,c");
  EXPECT_TRUE(m.warnings.empty());
}

TEST(CorrelationTest, ZeroVarianceGivesNaNAndWarning) {
  const Table table = Table::FromColumns({Column::Continuous("a", {1, 2, 3, 4}),
                                          Column::Continuous("k", {5, 5, 5, 5})});
  const CorrelationMatrix m = ComputeCorrelation(table, {"a", "k"});
  EXPECT_TRUE(std::isnan(m.at(0, 1)));
  EXPECT_TRUE(std::isnan(m.at(1, 1)));
  EXPECT_DOUBLE_EQ(m.at(0, 0), 1.0);
  ASSERT_EQ(m.warnings.size(), 1u);
  EXPECT_NE(m.ToCsv().find("NaN"), std::string::npos);
  EXPECT_THROW(ComputeCorrelation(table, {"a"}), Error);
}

}  // namespace
}  // namespace rlt
