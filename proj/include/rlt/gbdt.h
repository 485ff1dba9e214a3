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

// Histogram-based, leaf-wise gradient-boosted decision trees for binary
// classification with logistic loss.
//
// Training summary:
//   - Features are discretized once by a BinMapper fitted on the train split.
//     Bin 0 holds missing values in every feature.
//   - Each iteration computes g = sigmoid(s) - y and h = sigmoid(s)(1 - sigmoid(s))
//     and grows one tree leaf-wise: the leaf whose best split has the highest
//     gain G_L^2/(H_L+l2) + G_R^2/(H_R+l2) - G^2/(H+l2) is split next, until
//     num_leaves is reached or no split with positive gain and
//     min_data_in_leaf rows per side remains.
//   - Leaf values are -G/(H+l2) * learning_rate.
//   - Training stops when the validation log loss has not improved for
//     early_stopping_rounds iterations; trees after the best iteration are
//     discarded.
//
// Results are bit-identical for any thread count: per-feature work is done by
// a single thread and reductions run in feature order.

#ifndef RLT_GBDT_H_
#define RLT_GBDT_H_

#include <bitset>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rlt/table.h"

namespace rlt {

struct GbdtParams {
  int num_leaves = 491;
  int max_depth = -1;  // -1 = unlimited.
  double learning_rate = 0.05;
  int num_iterations = 10000;
  int early_stopping_rounds = 100;
  int min_data_in_leaf = 20;
  double lambda_l2 = 1.0;
  int max_bins = 255;
  std::uint64_t seed = 0;
  double feature_fraction = 1.0;
  // Categorical split regularization: categories with fewer rows than
  // min_data_per_group in a leaf never go left; cat_smooth is added to the
  // hessian when ordering categories; cat_l2 is added to lambda_l2 in the
  // gain of categorical splits.
  int min_data_per_group = 100;
  double cat_smooth = 10.0;
  double cat_l2 = 10.0;
  int num_threads = 0;  // 0 = OpenMP default.

  void Validate() const;
  nlohmann::json ToJson() const;
  // Keys absent from `json` keep their current values. Unknown keys throw.
  void Override(const nlohmann::json& json);
  static GbdtParams FromJson(const nlohmann::json& json);
};

struct LossDerivatives {
  double grad;
  double hess;
};

// Logistic loss derivatives with respect to the raw score.
LossDerivatives LossGradHess(double score, std::uint8_t label);

// ------------------------------------------------------------------ binning

enum class BinKind : std::uint8_t { kNumeric, kCategorical };

inline constexpr int kMissingBin = 0;
inline constexpr int kMaxBinsLimit = 255;

// Discretization of one feature.
//   Numeric (continuous and binary columns): finite bin b >= 1 holds values
//   in (upper_bounds[b-2], upper_bounds[b-1]]; the last finite bin is
//   open-ended. num_bins = upper_bounds.size() + 2.
//   Categorical: bin b in [1, categories.size()] is the category token
//   categories[b-1]; every other token (including tokens unseen in
//   training) falls into the overflow bin num_bins - 1.
struct FeatureBins {
  std::string name;
  BinKind kind = BinKind::kNumeric;
  std::vector<double> upper_bounds;
  std::vector<std::string> categories;
  int num_bins = 2;

  int overflow_bin() const { return num_bins - 1; }
  // Numeric features only.
  std::uint8_t BinOf(double value) const;
  // Upper bound of finite bin `bin` (numeric), +inf for the last bin.
  double UpperBound(int bin) const;

  nlohmann::json ToJson() const;
  static FeatureBins FromJson(const nlohmann::json& json);
};

// Column-major binned feature matrix.
struct BinnedData {
  std::size_t n_rows = 0;
  std::vector<std::vector<std::uint8_t>> bins;  // [feature][row]
};

class BinMapper {
 public:
  BinMapper() = default;
  explicit BinMapper(std::vector<FeatureBins> features) : features_(std::move(features)) {}

  // Quantile thresholds from the finite values of each numeric feature in
  // `table` (at most 200k sampled values); identity coding for categoricals.
  static BinMapper Fit(const Table& table, const std::vector<std::string>& features,
                       int max_bins, std::uint64_t seed);

  const std::vector<FeatureBins>& features() const { return features_; }
  std::size_t size() const { return features_.size(); }
  std::vector<std::string> FeatureNames() const;

  // Bins the named features of `table`. Categorical tokens are matched by
  // value, so tables with a different dictionary are binned consistently.
  BinnedData Apply(const Table& table, int num_threads = 0) const;

  nlohmann::json ToJson() const;
  static BinMapper FromJson(const nlohmann::json& json);

 private:
  std::vector<FeatureBins> features_;
};

// ---------------------------------------------------------------- histograms

struct HistBin {
  double grad = 0.0;
  double hess = 0.0;
  std::int64_t count = 0;
};

// Accumulates gradient statistics of `rows` for one feature.
void BuildHistogram(std::span<const std::uint8_t> bins, std::span<const double> grad,
                    std::span<const double> hess, std::span<const std::uint32_t> rows,
                    std::span<HistBin> out);
// out[b] = parent[b] - sibling[b] for every bin.
void SubtractHistogram(std::span<const HistBin> parent, std::span<const HistBin> sibling,
                       std::span<HistBin> out);

// -------------------------------------------------------------------- trees

enum class SplitKind : std::uint8_t { kNumeric, kCategorical };

struct TreeNode {
  bool is_leaf = true;
  // Internal nodes.
  int feature = -1;
  SplitKind kind = SplitKind::kNumeric;
  int threshold_bin = 0;     // Numeric: finite bins <= threshold_bin go left.
  double threshold = 0.0;    // Numeric: value upper bound of threshold_bin.
  std::bitset<256> left_bins;  // Categorical: bins that go left.
  bool default_left = false;   // Missing (bin 0) routing.
  int left = -1;
  int right = -1;
  double gain = 0.0;
  // Leaves.
  double value = 0.0;  // Additive log-odds contribution (already scaled).
  std::int64_t count = 0;

  bool GoesLeft(std::uint8_t bin) const;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root.

  int NumLeaves() const;
  int NumInternal() const;
  int Depth() const;
  // Index of the leaf reached by a row of binned features.
  int Route(const BinnedData& data, std::size_t row) const;

  nlohmann::json ToJson() const;
  static Tree FromJson(const nlohmann::json& json);
};

struct IterationRecord {
  int iteration;  // 1-based count of trees after this iteration.
  double train_logloss;
  double valid_logloss;
};

class GbdtModel {
 public:
  GbdtModel() = default;
  GbdtModel(GbdtParams params, BinMapper bin_mapper, std::vector<Tree> trees,
            double base_score, std::string label_name = "",
            std::vector<IterationRecord> curve = {});

  const GbdtParams& params() const { return params_; }
  const BinMapper& bin_mapper() const { return bin_mapper_; }
  const std::vector<Tree>& trees() const { return trees_; }
  double base_score() const { return base_score_; }
  int best_iteration() const { return static_cast<int>(trees_.size()); }
  const std::vector<std::int64_t>& split_counts() const { return split_counts_; }
  const std::vector<IterationRecord>& curve() const { return curve_; }
  const std::string& label_name() const { return label_name_; }
  std::vector<std::string> FeatureNames() const { return bin_mapper_.FeatureNames(); }

  std::vector<double> PredictRaw(const Table& table) const;
  std::vector<double> PredictRaw(const BinnedData& data) const;
  // sigmoid(base_score + sum of leaf contributions).
  std::vector<double> Predict(const Table& table) const;

  // (feature name, split count), descending by count; ties keep feature order.
  std::vector<std::pair<std::string, std::int64_t>> FeatureImportance() const;

  nlohmann::json ToJson() const;
  static GbdtModel FromJson(const nlohmann::json& json);
  void Save(const std::string& path) const;
  static GbdtModel Load(const std::string& path);

 private:
  GbdtParams params_;
  BinMapper bin_mapper_;
  std::vector<Tree> trees_;
  double base_score_ = 0.0;
  std::string label_name_;
  std::vector<IterationRecord> curve_;
  std::vector<std::int64_t> split_counts_;
};

// Trains on `train`, early-stopping on `valid`. `label` defaults to the
// table's install label column. Throws on a single-class train label or an
// empty validation table.
GbdtModel Fit(const GbdtParams& params, const Table& train, const Table& valid,
              const std::vector<std::string>& features, const std::string& label = "");

}  // namespace rlt

#endif  // RLT_GBDT_H_
