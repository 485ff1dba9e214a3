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
#include <random>

#include <gtest/gtest.h>

#include "rlt/common.h"
#include "rlt/gbdt.h"
#include "rlt/metrics.h"
#include "test_util.h"

namespace rlt {
namespace {

struct Dataset {
  Table train;
  Table valid;
  std::vector<std::string> features;
};

// Continuous features x0..x{k-1} plus a categorical "c"; install label drawn
// from a logistic model of x0, x1 and c.
Table MakeTable(std::size_t n, std::uint64_t seed, double signal = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  constexpr int kCont = 4;
  std::vector<std::vector<double>> x(kCont, std::vector<double>(n));
  std::vector<std::string> cats(n);
  std::vector<std::uint8_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < kCont; ++c) x[c][i] = normal(rng);
    if (unit(rng) < 0.05) x[2][i] = std::nan("");
    const int cat = static_cast<int>(rng() % 12);
    cats[i] = cat == 11 ? "" : "k" + std::to_string(cat);
    const double logit = signal * (1.5 * x[0][i] - x[1][i] * x[1][i] + (cat % 3 == 0 ? 1.0 : -0.5));
    labels[i] = unit(rng) < 1.0 / (1.0 + std::exp(-logit));
  }
  std::vector<Column> columns;
  for (int c = 0; c < kCont; ++c) columns.push_back(Column::Continuous("x" + std::to_string(c), x[c]));
  columns.push_back(Column::FromTokens("c", cats));
  columns.push_back(Column::Binary("y", labels, ColumnRole::kLabelInstall));
  return Table::FromColumns(std::move(columns));
}

Dataset MakeDataset(std::size_t n_train, std::size_t n_valid, std::uint64_t seed) {
  const Table all = MakeTable(n_train + n_valid, seed);
  std::vector<std::size_t> a(n_train), b(n_valid);
  std::iota(a.begin(), a.end(), 0);
  std::iota(b.begin(), b.end(), n_train);
  return {all.SelectRows(a), all.SelectRows(b), {"x0", "x1", "x2", "x3", "c"}};
}

GbdtParams SmallParams() {
  GbdtParams params;
  params.num_leaves = 15;
  params.learning_rate = 0.1;
  params.num_iterations = 60;
  params.early_stopping_rounds = 20;
  params.min_data_in_leaf = 10;
  params.min_data_per_group = 10;
  params.num_threads = 1;
  return params;
}

double LogLossOf(const Table& table, const std::vector<double>& p) {
  return LogLoss(EvalBatch(table.column("y").flags(), p));
}

TEST(GbdtParamsTest, ValidationAndOverride) {
  GbdtParams params;
  EXPECT_EQ(params.num_leaves, 491);
  EXPECT_EQ(params.max_depth, -1);
  EXPECT_EQ(params.early_stopping_rounds, 100);
  EXPECT_NO_THROW(params.Validate());
  params.num_leaves = 1;
  EXPECT_THROW(params.Validate(), Error);
  params = GbdtParams();
  params.max_bins = 256;
  EXPECT_THROW(params.Validate(), Error);
  params = GbdtParams();
  params.learning_rate = 0.0;
  EXPECT_THROW(params.Validate(), Error);
  params = GbdtParams();
  params.Override(nlohmann::json{{"num_leaves", 31}, {"learning_rate", 0.2}});
  EXPECT_EQ(params.num_leaves, 31);
  EXPECT_DOUBLE_EQ(params.learning_rate, 0.2);
  EXPECT_THROW(params.Override(nlohmann::json{{"num_leafs", 3}}), Error);
  EXPECT_EQ(GbdtParams::FromJson(params.ToJson()).ToJson(), params.ToJson());
}

TEST(LossGradHessTest, AtZero) {
  const auto d = LossGradHess(0.0, 1);
  EXPECT_DOUBLE_EQ(d.grad, -0.5);
  EXPECT_DOUBLE_EQ(d.hess, 0.25);
}

TEST(BinMapperTest, NumericBinsAreOrderedAndMissingIsZero) {
  const Table table = MakeTable(3000, 1);
  const BinMapper mapper = BinMapper::Fit(table, {"x0", "x2", "c"}, 32, 0);
  const FeatureBins& x0 = mapper.features()[0];
  EXPECT_LE(x0.num_bins, 32);
  for (std::size_t i = 1; i < x0.upper_bounds.size(); ++i) {
    EXPECT_LT(x0.upper_bounds[i - 1], x0.upper_bounds[i]);
  }
  const BinnedData data = mapper.Apply(table, 1);
  const auto x2 = table.column("x2").values();
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    EXPECT_EQ(data.bins[1][r] == kMissingBin, std::isnan(x2[r]));
  }
  // Bins are monotone in the value.
  const auto x0v = table.column("x0").values();
  for (std::size_t r = 1; r < table.n_rows(); ++r) {
    if (x0v[r] < x0v[r - 1]) EXPECT_LE(data.bins[0][r], data.bins[0][r - 1]);
  }
  EXPECT_EQ(BinMapper::FromJson(mapper.ToJson()).ToJson(), mapper.ToJson());
}

TEST(BinMapperTest, FewDistinctValuesGetOneBinEach) {
  const Table table = Table::FromColumns({Column::Continuous("v", {3, 1, 2, 2, 1, 3, std::nan("")})});
  const BinMapper mapper = BinMapper::Fit(table, {"v"}, 255, 0);
  const BinnedData data = mapper.Apply(table, 1);
  EXPECT_EQ(data.bins[0], (std::vector<std::uint8_t>{3, 1, 2, 2, 1, 3, 0}));
}

TEST(BinMapperTest, CategoricalOverflowAndUnseenTokens) {
  std::vector<std::string> tokens;
  for (int i = 0; i < 10; ++i) tokens.push_back("t" + std::to_string(i));
  const Table table = Table::FromColumns({Column::FromTokens("c", tokens)});
  const BinMapper mapper = BinMapper::Fit(table, {"c"}, 5, 0);
  const FeatureBins& bins = mapper.features()[0];
  EXPECT_EQ(bins.num_bins, 5);
  const Table other = Table::FromColumns({Column::FromTokens("c", {"t0", "never", ""})});
  const BinnedData data = mapper.Apply(other, 1);
  EXPECT_GE(data.bins[0][0], 1);
  EXPECT_LT(data.bins[0][0], bins.overflow_bin());
  EXPECT_EQ(data.bins[0][1], bins.overflow_bin());
}

TEST(HistogramTest, SubtractionIdentity) {
  std::mt19937_64 rng(4);
  const std::size_t n = 5000;
  std::vector<std::uint8_t> bins(n);
  std::vector<double> grad(n), hess(n);
  for (std::size_t i = 0; i < n; ++i) {
    bins[i] = rng() % 40;
    grad[i] = static_cast<double>(rng() % 2000) / 1000.0 - 1.0;
    hess[i] = static_cast<double>(rng() % 1000) / 4000.0;
  }
  std::vector<std::uint32_t> all(n), left, right;
  std::iota(all.begin(), all.end(), 0);
  for (const auto r : all) (rng() % 3 == 0 ? left : right).push_back(r);
  std::vector<HistBin> parent(40), l(40), r(40), derived(40);
  BuildHistogram(bins, grad, hess, all, parent);
  BuildHistogram(bins, grad, hess, left, l);
  BuildHistogram(bins, grad, hess, right, r);
  SubtractHistogram(parent, l, derived);
  for (int b = 0; b < 40; ++b) {
    EXPECT_EQ(derived[b].count, r[b].count);
    EXPECT_NEAR(derived[b].grad, r[b].grad, 1e-9);
    EXPECT_NEAR(derived[b].hess, r[b].hess, 1e-9);
  }
}

TEST(GbdtModelTest, HandBuiltStump) {
  FeatureBins bins;
  bins.name = "x";
  bins.upper_bounds = {0.0};
  bins.num_bins = 3;
  Tree tree;
  tree.nodes.resize(3);
  tree.nodes[0].is_leaf = false;
  tree.nodes[0].feature = 0;
  tree.nodes[0].threshold_bin = 1;
  tree.nodes[0].default_left = false;
  tree.nodes[0].left = 1;
  tree.nodes[0].right = 2;
  const double v = 0.8, lr = 0.05, base = -1.2;
  tree.nodes[1].value = -v * lr;
  tree.nodes[2].value = v * lr;
  GbdtParams params;
  params.learning_rate = lr;
  const GbdtModel model(params, BinMapper({bins}), {tree}, base);
  const Table table = Table::FromColumns({Column::Continuous("x", {-3.0, 0.0, 0.5, std::nan("")})});
  const auto p = model.Predict(table);
  const auto sigmoid = [](double s) { return 1.0 / (1.0 + std::exp(-s)); };
  EXPECT_NEAR(p[0], sigmoid(base - v * lr), 1e-15);
  EXPECT_NEAR(p[1], sigmoid(base - v * lr), 1e-15);
  EXPECT_NEAR(p[2], sigmoid(base + v * lr), 1e-15);
  EXPECT_NEAR(p[3], sigmoid(base + v * lr), 1e-15);  // Missing goes right.
  const auto importance = model.FeatureImportance();
  ASSERT_EQ(importance.size(), 1u);
  EXPECT_EQ(importance[0], std::make_pair(std::string("x"), std::int64_t{1}));
}

TEST(GbdtModelTest, ZeroTreesPredictTrainRate) {
  FeatureBins bins;
  bins.name = "x";
  const GbdtModel model(GbdtParams(), BinMapper({bins}), {}, std::log(1.0 / 3.0));
  const Table table = Table::FromColumns({Column::Continuous("x", {1.0, 2.0})});
  for (const double p : model.Predict(table)) EXPECT_NEAR(p, 0.25, 1e-15);
  EXPECT_EQ(model.FeatureImportance()[0].second, 0);
}

TEST(GbdtFitTest, ConstantFeaturesGiveZeroTrees) {
  std::vector<std::uint8_t> y(400);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = i % 5 == 0;
  const Table table = Table::FromColumns({Column::Continuous("k", std::vector<double>(400, 7.0)),
                                          Column::Binary("y", y, ColumnRole::kLabelInstall)});
  const GbdtModel model = Fit(SmallParams(), table, table, {"k"});
  EXPECT_EQ(model.best_iteration(), 0);
  const auto p = model.Predict(table);
  for (const double v : p) EXPECT_NEAR(v, 0.2, 1e-12);
  EXPECT_NEAR(Nce(EvalBatch(table.column("y").flags(), p)).nce, 1.0, 1e-9);
}

TEST(GbdtFitTest, ErrorContract) {
  const Dataset data = MakeDataset(500, 100, 2);
  std::vector<std::uint8_t> ones(500, 1);
  const Table single = data.train.ReplaceColumn(Column::Binary("y", ones, ColumnRole::kLabelInstall));
  EXPECT_THROW(Fit(SmallParams(), single, data.valid, data.features), Error);
  EXPECT_THROW(Fit(SmallParams(), data.train, data.valid.SelectRows({}), data.features), Error);
  EXPECT_THROW(Fit(SmallParams(), data.train, data.valid, {"nope"}), Error);
}

TEST(GbdtFitTest, SeparableOneFeature) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  const auto make = [&](std::size_t n) {
    std::vector<double> x(n);
    std::vector<std::uint8_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = normal(rng);
      y[i] = x[i] > 0;
    }
    return Table::FromColumns({Column::Continuous("x", x), Column::Binary("y", y, ColumnRole::kLabelInstall)});
  };
  const Table train = make(2000), valid = make(500);
  GbdtParams params = SmallParams();
  params.num_iterations = 50;
  params.early_stopping_rounds = 50;
  const GbdtModel model = Fit(params, train, valid, {"x"});
  const auto p = model.Predict(valid);
  const EvalBatch batch(valid.column("y").flags(), p);
  EXPECT_GE(Auc(batch), 0.99);
  EXPECT_LE(LogLoss(batch), 0.1);
}

TEST(GbdtFitTest, TrainLossNonIncreasingAndCurveConsistent) {
  const Dataset data = MakeDataset(4000, 1000, 3);
  const GbdtModel model = Fit(SmallParams(), data.train, data.valid, data.features);
  const auto& curve = model.curve();
  ASSERT_FALSE(curve.empty());
  for (std::size_t i = 1; i < curve.size(); ++i) {
    EXPECT_LE(curve[i].train_logloss, curve[i - 1].train_logloss + 1e-9) << i;
  }
  ASSERT_GT(model.best_iteration(), 0);
  const auto& best = curve[model.best_iteration() - 1];
  EXPECT_NEAR(LogLossOf(data.valid, model.Predict(data.valid)), best.valid_logloss, 1e-12);
  EXPECT_NEAR(LogLossOf(data.train, model.Predict(data.train)), best.train_logloss, 1e-12);
}

TEST(GbdtFitTest, StructuralInvariants) {
  const Dataset data = MakeDataset(3000, 800, 5);
  GbdtParams params = SmallParams();
  params.num_leaves = 7;
  params.min_data_in_leaf = 40;
  const GbdtModel model = Fit(params, data.train, data.valid, data.features);
  std::int64_t internal = 0;
  const BinnedData binned = model.bin_mapper().Apply(data.train, 1);
  for (const Tree& tree : model.trees()) {
    EXPECT_LE(tree.NumLeaves(), params.num_leaves);
    EXPECT_EQ(tree.NumLeaves(), tree.NumInternal() + 1);
    internal += tree.NumInternal();
    std::vector<std::int64_t> hits(tree.nodes.size(), 0);
    for (std::size_t r = 0; r < binned.n_rows; ++r) ++hits[tree.Route(binned, r)];
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      if (!tree.nodes[i].is_leaf) continue;
      EXPECT_EQ(hits[i], tree.nodes[i].count);
      EXPECT_GE(hits[i], params.min_data_in_leaf);
    }
  }
  std::int64_t total = 0;
  for (const auto& [name, count] : model.FeatureImportance()) total += count;
  EXPECT_EQ(total, internal);
  const auto importance = model.FeatureImportance();
  for (std::size_t i = 1; i < importance.size(); ++i) {
    EXPECT_GE(importance[i - 1].second, importance[i].second);
  }
}

TEST(GbdtFitTest, MaxDepthRespected) {
  const Dataset data = MakeDataset(3000, 800, 6);
  GbdtParams params = SmallParams();
  params.max_depth = 2;
  params.num_leaves = 31;
  const GbdtModel model = Fit(params, data.train, data.valid, data.features);
  for (const Tree& tree : model.trees()) {
    EXPECT_LE(tree.Depth(), 2);
    EXPECT_LE(tree.NumLeaves(), 4);
  }
}

TEST(GbdtFitTest, EarlyStoppingKeepsArgmin) {
  const Dataset data = MakeDataset(1500, 400, 7);
  GbdtParams params = SmallParams();
  params.num_leaves = 63;
  params.min_data_in_leaf = 2;
  params.learning_rate = 0.3;
  params.num_iterations = 400;
  params.early_stopping_rounds = 15;
  const GbdtModel model = Fit(params, data.train, data.valid, data.features);
  const auto& curve = model.curve();
  const auto base = std::vector<double>(data.valid.n_rows(), 1.0 / (1.0 + std::exp(-model.base_score())));
  double best = LogLossOf(data.valid, base);
  int argmin = 0;
  for (const auto& record : curve) {
    if (record.valid_logloss < best) {
      best = record.valid_logloss;
      argmin = record.iteration;
    }
  }
  EXPECT_EQ(model.best_iteration(), argmin);
  EXPECT_LT(static_cast<int>(curve.size()), params.num_iterations);  // Stopped early.
  EXPECT_EQ(static_cast<int>(curve.size()), argmin + params.early_stopping_rounds);
}

TEST(GbdtFitTest, DeterministicAcrossThreadCounts) {
  const Dataset data = MakeDataset(3000, 600, 9);
  GbdtParams params = SmallParams();
  params.feature_fraction = 0.6;
  params.seed = 17;
  params.num_threads = 1;
  const GbdtModel a = Fit(params, data.train, data.valid, data.features);
  params.num_threads = 4;
  const GbdtModel b = Fit(params, data.train, data.valid, data.features);
  EXPECT_EQ(a.Predict(data.valid), b.Predict(data.valid));
  EXPECT_EQ(a.ToJson().dump(), b.ToJson().dump());
}

TEST(GbdtFitTest, FeatureFractionUsesSeed) {
  const Dataset data = MakeDataset(2000, 500, 10);
  GbdtParams params = SmallParams();
  params.feature_fraction = 0.4;
  params.seed = 1;
  const GbdtModel a = Fit(params, data.train, data.valid, data.features);
  params.seed = 2;
  const GbdtModel b = Fit(params, data.train, data.valid, data.features);
  EXPECT_NE(a.Predict(data.valid), b.Predict(data.valid));
}

TEST(GbdtFitTest, CategoricalSignalIsUsed) {
  const Dataset data = MakeDataset(4000, 1000, 11);
  const GbdtModel model = Fit(SmallParams(), data.train, data.valid, {"c"});
  ASSERT_GT(model.best_iteration(), 0);
  bool categorical = false;
  for (const Tree& tree : model.trees()) {
    for (const auto& node : tree.nodes) categorical |= !node.is_leaf && node.kind == SplitKind::kCategorical;
  }
  EXPECT_TRUE(categorical);
  EXPECT_LT(Nce(EvalBatch(data.valid.column("y").flags(), model.Predict(data.valid))).nce, 0.97);
}

TEST(GbdtModelTest, JsonRoundTripPredictsIdentically) {
  testing::TempDir dir("model");
  const Dataset data = MakeDataset(2000, 500, 12);
  const GbdtModel model = Fit(SmallParams(), data.train, data.valid, data.features);
  model.Save(dir.file("m.json"));
  const GbdtModel loaded = GbdtModel::Load(dir.file("m.json"));
  EXPECT_EQ(loaded.Predict(data.valid), model.Predict(data.valid));
  EXPECT_EQ(loaded.split_counts(), model.split_counts());
  EXPECT_EQ(loaded.ToJson().dump(), model.ToJson().dump());
  EXPECT_THROW(GbdtModel::FromJson(nlohmann::json{{"format", "other"}}), Error);
}

TEST(GbdtModelTest, PredictsOnTablesWithOtherDictionaries) {
  const Dataset data = MakeDataset(2000, 500, 13);
  const GbdtModel model = Fit(SmallParams(), data.train, data.valid, data.features);
  // Rebuilding the column from tokens gives it a fresh dictionary.
  const Column& c = data.valid.column("c");
  std::vector<std::string> tokens(data.valid.n_rows());
  for (std::size_t r = 0; r < tokens.size(); ++r) tokens[r] = c.IsMissing(r) ? "" : c.Token(r);
  const Table recoded = data.valid.ReplaceColumn(Column::FromTokens("c", tokens));
  ASSERT_NE(recoded.column("c").dictionary(), c.dictionary());
  EXPECT_EQ(model.Predict(recoded), model.Predict(data.valid));
}

}  // namespace
}  // namespace rlt
