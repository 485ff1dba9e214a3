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

#include "rlt/gbdt.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "parallel.h"
#include "rlt/common.h"
#include "rlt/metrics.h"
#include "rlt/random.h"

namespace rlt {

// ------------------------------------------------------------------ params

void GbdtParams::Validate() const {
  auto fail = [](const std::string& message) { throw Error("gbdt params: " + message); };
  if (num_leaves < 2) fail("num_leaves must be >= 2");
  if (max_depth == 0 || max_depth < -1) fail("max_depth must be -1 or positive");
  if (!(learning_rate > 0) || learning_rate > 1) fail("learning_rate must be in (0, 1]");
  if (num_iterations < 0) fail("num_iterations must be non-negative");
  if (early_stopping_rounds < 1) fail("early_stopping_rounds must be >= 1");
  if (min_data_in_leaf < 1) fail("min_data_in_leaf must be >= 1");
  if (!(lambda_l2 >= 0)) fail("lambda_l2 must be non-negative");
  if (max_bins < 2 || max_bins > kMaxBinsLimit) fail("max_bins must be in [2, 255]");
  if (!(feature_fraction > 0) || feature_fraction > 1) fail("feature_fraction must be in (0, 1]");
  if (min_data_per_group < 1) fail("min_data_per_group must be >= 1");
  if (!(cat_smooth >= 0) || !(cat_l2 >= 0)) fail("cat_smooth and cat_l2 must be non-negative");
  if (num_threads < 0) fail("num_threads must be non-negative");
}

nlohmann::json GbdtParams::ToJson() const {
  return {{"num_leaves", num_leaves},
          {"max_depth", max_depth},
          {"learning_rate", learning_rate},
          {"num_iterations", num_iterations},
          {"early_stopping_rounds", early_stopping_rounds},
          {"min_data_in_leaf", min_data_in_leaf},
          {"lambda_l2", lambda_l2},
          {"max_bins", max_bins},
          {"seed", seed},
          {"feature_fraction", feature_fraction},
          {"min_data_per_group", min_data_per_group},
          {"cat_smooth", cat_smooth},
          {"cat_l2", cat_l2}};
}

void GbdtParams::Override(const nlohmann::json& json) {
  if (!json.is_object()) throw Error("gbdt params must be a JSON object");
  for (const auto& [key, value] : json.items()) {
    try {
      if (key == "num_leaves") num_leaves = value.get<int>();
      else if (key == "max_depth") max_depth = value.get<int>();
      else if (key == "learning_rate") learning_rate = value.get<double>();
      else if (key == "num_iterations") num_iterations = value.get<int>();
      else if (key == "early_stopping_rounds") early_stopping_rounds = value.get<int>();
      else if (key == "min_data_in_leaf") min_data_in_leaf = value.get<int>();
      else if (key == "lambda_l2") lambda_l2 = value.get<double>();
      else if (key == "max_bins") max_bins = value.get<int>();
      else if (key == "seed") seed = value.get<std::uint64_t>();
      else if (key == "feature_fraction") feature_fraction = value.get<double>();
      else if (key == "min_data_per_group") min_data_per_group = value.get<int>();
      else if (key == "cat_smooth") cat_smooth = value.get<double>();
      else if (key == "cat_l2") cat_l2 = value.get<double>();
      else if (key == "num_threads") num_threads = value.get<int>();
      else throw Error("gbdt params: unknown key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw Error("gbdt params: bad value for '" + key + "': " + e.what());
    }
  }
}

GbdtParams GbdtParams::FromJson(const nlohmann::json& json) {
  GbdtParams params;
  params.Override(json);
  return params;
}

LossDerivatives LossGradHess(double score, std::uint8_t label) {
  const double p = Sigmoid(score);
  return {p - static_cast<double>(label), p * (1.0 - p)};
}

// ----------------------------------------------------------------- trainer

namespace {

struct SplitStats {
  double grad = 0.0;
  double hess = 0.0;
  std::int64_t count = 0;

  SplitStats& operator+=(const HistBin& bin) {
    grad += bin.grad;
    hess += bin.hess;
    count += bin.count;
    return *this;
  }
  SplitStats operator-(const SplitStats& other) const {
    return {grad - other.grad, hess - other.hess, count - other.count};
  }
};

struct SplitCandidate {
  double gain = 0.0;
  bool valid = false;
  int feature = -1;
  SplitKind kind = SplitKind::kNumeric;
  int threshold_bin = 0;
  bool default_left = false;
  std::bitset<256> left_bins;
  SplitStats left;
  SplitStats right;
};

struct LeafState {
  int node = 0;
  std::uint32_t begin = 0;
  std::uint32_t count = 0;
  int depth = 0;
  SplitStats total;
  std::vector<HistBin> hist;
  SplitCandidate best;
};

double Score(const SplitStats& s, double l2) { return s.grad * s.grad / (s.hess + l2); }

class TreeGrower {
 public:
  TreeGrower(const GbdtParams& params, const BinnedData& data,
             const std::vector<FeatureBins>& features)
      : params_(params), data_(data), features_(features), rows_(data.n_rows),
        scratch_(data.n_rows) {
    offsets_.resize(features.size() + 1, 0);
    for (std::size_t f = 0; f < features.size(); ++f) {
      offsets_[f + 1] = offsets_[f] + features[f].num_bins;
    }
  }

  // Grows one tree. Leaf values are final (scaled by the learning rate).
  // `leaf_rows` receives, for each leaf node, its row segment.
  Tree Grow(std::span<const double> grad, std::span<const double> hess,
            const std::vector<int>& active, std::vector<std::pair<int, std::span<const std::uint32_t>>>& leaf_rows) {
    grad_ = grad;
    hess_ = hess;
    active_ = &active;
    std::iota(rows_.begin(), rows_.end(), 0u);

    Tree tree;
    tree.nodes.emplace_back();
    std::vector<LeafState> leaves;
    LeafState root;
    root.node = 0;
    root.begin = 0;
    root.count = static_cast<std::uint32_t>(data_.n_rows);
    root.hist.assign(offsets_.back(), HistBin{});
    BuildLeafHistogram(root);
    for (std::size_t r = 0; r < data_.n_rows; ++r) {
      root.total.grad += grad[r];
      root.total.hess += hess[r];
    }
    root.total.count = root.count;
    FindBestSplit(root);
    leaves.push_back(std::move(root));

    while (static_cast<int>(leaves.size()) < params_.num_leaves) {
      int chosen = -1;
      double best_gain = 0.0;
      for (std::size_t i = 0; i < leaves.size(); ++i) {
        if (leaves[i].best.valid && leaves[i].best.gain > best_gain) {
          best_gain = leaves[i].best.gain;
          chosen = static_cast<int>(i);
        }
      }
      if (chosen < 0) break;
      LeafState right = SplitLeaf(leaves[chosen], tree);
      leaves.push_back(std::move(right));
    }

    leaf_rows.clear();
    for (const auto& leaf : leaves) {
      TreeNode& node = tree.nodes[leaf.node];
      node.value = -leaf.total.grad / (leaf.total.hess + params_.lambda_l2) * params_.learning_rate;
      node.count = leaf.count;
      leaf_rows.emplace_back(leaf.node, std::span<const std::uint32_t>(rows_).subspan(leaf.begin, leaf.count));
    }
    return tree;
  }

 private:
  std::span<HistBin> FeatureHist(LeafState& leaf, int f) {
    return std::span<HistBin>(leaf.hist).subspan(offsets_[f], features_[f].num_bins);
  }

  void BuildLeafHistogram(LeafState& leaf) {
    const auto segment = std::span<const std::uint32_t>(rows_).subspan(leaf.begin, leaf.count);
    const auto& active = *active_;
    const auto n_active = static_cast<std::int64_t>(active.size());
#pragma omp parallel for schedule(dynamic) num_threads(internal::ResolveThreads(params_.num_threads))
    for (std::int64_t i = 0; i < n_active; ++i) {
      const int f = active[i];
      BuildHistogram(data_.bins[f], grad_, hess_, segment, FeatureHist(leaf, f));
    }
  }

  void FindBestSplit(LeafState& leaf) {
    leaf.best = SplitCandidate{};
    if (params_.max_depth > 0 && leaf.depth >= params_.max_depth) return;
    if (leaf.count < 2u * static_cast<std::uint32_t>(params_.min_data_in_leaf)) return;
    const auto& active = *active_;
    std::vector<SplitCandidate> per_feature(active.size());
    const auto n_active = static_cast<std::int64_t>(active.size());
#pragma omp parallel for schedule(dynamic) num_threads(internal::ResolveThreads(params_.num_threads))
    for (std::int64_t i = 0; i < n_active; ++i) {
      const int f = active[i];
      if (features_[f].kind == BinKind::kNumeric) {
        per_feature[i] = BestNumericSplit(leaf, f);
      } else {
        per_feature[i] = BestCategoricalSplit(leaf, f);
      }
    }
    // Active features are in ascending order, so strict comparison keeps the
    // lowest feature index on ties.
    for (const auto& candidate : per_feature) {
      if (candidate.valid && (!leaf.best.valid || candidate.gain > leaf.best.gain)) {
        leaf.best = candidate;
      }
    }
  }

  SplitCandidate BestNumericSplit(LeafState& leaf, int f) {
    const auto hist = FeatureHist(leaf, f);
    const int n_bins = features_[f].num_bins;
    const double l2 = params_.lambda_l2;
    const double parent = Score(leaf.total, l2);
    const auto min_data = static_cast<std::int64_t>(params_.min_data_in_leaf);
    SplitCandidate best;
    const HistBin& missing = hist[kMissingBin];
    for (const bool default_left : {false, true}) {
      if (default_left && missing.count == 0) break;
      SplitStats left;
      if (default_left) left += missing;
      for (int t = 1; t <= n_bins - 2; ++t) {
        left += hist[t];
        if (left.count < min_data) continue;
        const SplitStats right = leaf.total - left;
        if (right.count < min_data) break;
        const double gain = Score(left, l2) + Score(right, l2) - parent;
        if (gain > best.gain) {
          best.gain = gain;
          best.valid = true;
          best.feature = f;
          best.kind = SplitKind::kNumeric;
          best.threshold_bin = t;
          best.default_left = default_left;
          best.left = left;
          best.right = right;
        }
      }
    }
    return best;
  }

  SplitCandidate BestCategoricalSplit(LeafState& leaf, int f) {
    const auto hist = FeatureHist(leaf, f);
    const int n_bins = features_[f].num_bins;
    const double l2 = params_.lambda_l2 + params_.cat_l2;
    const double parent = Score(leaf.total, l2);
    const auto min_data = static_cast<std::int64_t>(params_.min_data_in_leaf);
    std::vector<int> used;
    for (int b = 0; b < n_bins; ++b) {
      if (hist[b].count > 0 && hist[b].count >= params_.min_data_per_group) used.push_back(b);
    }
    SplitCandidate best;
    if (used.empty()) return best;
    const double smooth = params_.cat_smooth;
    std::stable_sort(used.begin(), used.end(), [&](int a, int b) {
      return hist[a].grad / (hist[a].hess + smooth) < hist[b].grad / (hist[b].hess + smooth);
    });
    for (const bool reverse : {false, true}) {
      SplitStats left;
      std::bitset<256> set;
      for (std::size_t i = 0; i < used.size(); ++i) {
        const int b = reverse ? used[used.size() - 1 - i] : used[i];
        left += hist[b];
        set.set(b);
        if (left.count < min_data) continue;
        const SplitStats right = leaf.total - left;
        if (right.count < min_data) break;
        const double gain = Score(left, l2) + Score(right, l2) - parent;
        if (gain > best.gain) {
          best.gain = gain;
          best.valid = true;
          best.feature = f;
          best.kind = SplitKind::kCategorical;
          best.left_bins = set;
          best.default_left = set.test(kMissingBin);
          best.left = left;
          best.right = right;
        }
      }
    }
    return best;
  }

  // Turns `leaf` into its left child and returns the right child.
  LeafState SplitLeaf(LeafState& leaf, Tree& tree) {
    const SplitCandidate split = leaf.best;
    const int left_node = static_cast<int>(tree.nodes.size());
    const int right_node = left_node + 1;
    {
      TreeNode& node = tree.nodes[leaf.node];
      node.is_leaf = false;
      node.feature = split.feature;
      node.kind = split.kind;
      node.threshold_bin = split.threshold_bin;
      node.threshold = split.kind == SplitKind::kNumeric
                           ? features_[split.feature].UpperBound(split.threshold_bin)
                           : 0.0;
      node.left_bins = split.left_bins;
      node.default_left = split.default_left;
      node.left = left_node;
      node.right = right_node;
      node.gain = split.gain;
      node.count = leaf.count;
    }
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    const TreeNode& node = tree.nodes[leaf.node];

    // Stable partition of the leaf's row segment.
    const auto& bins = data_.bins[split.feature];
    std::uint32_t n_left = 0, n_right = 0;
    for (std::uint32_t i = leaf.begin; i < leaf.begin + leaf.count; ++i) {
      const std::uint32_t row = rows_[i];
      if (node.GoesLeft(bins[row])) {
        rows_[leaf.begin + n_left++] = row;
      } else {
        scratch_[n_right++] = row;
      }
    }
    std::copy_n(scratch_.begin(), n_right, rows_.begin() + leaf.begin + n_left);

    LeafState right;
    right.node = right_node;
    right.begin = leaf.begin + n_left;
    right.count = n_right;
    right.depth = leaf.depth + 1;
    right.total = split.right;
    leaf.node = left_node;
    leaf.count = n_left;
    leaf.depth += 1;
    leaf.total = split.left;

    // Build the smaller child directly; the larger one is parent - smaller.
    LeafState& smaller = n_left <= n_right ? leaf : right;
    LeafState& larger = n_left <= n_right ? right : leaf;
    std::vector<HistBin> parent_hist = std::move(leaf.hist);
    smaller.hist.assign(offsets_.back(), HistBin{});
    BuildLeafHistogram(smaller);
    for (const int f : *active_) {
      const auto begin = static_cast<std::ptrdiff_t>(offsets_[f]);
      const auto size = static_cast<std::size_t>(features_[f].num_bins);
      SubtractHistogram(std::span<const HistBin>(parent_hist).subspan(begin, size),
                        std::span<const HistBin>(smaller.hist).subspan(begin, size),
                        std::span<HistBin>(parent_hist).subspan(begin, size));
    }
    larger.hist = std::move(parent_hist);
    FindBestSplit(leaf);
    FindBestSplit(right);
    return right;
  }

  const GbdtParams& params_;
  const BinnedData& data_;
  const std::vector<FeatureBins>& features_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> rows_;
  std::vector<std::uint32_t> scratch_;
  std::span<const double> grad_;
  std::span<const double> hess_;
  const std::vector<int>* active_ = nullptr;
};

std::vector<std::uint8_t> LabelsOf(const Table& table, const std::string& label) {
  const Column* column = label.empty() ? table.FindByRole(ColumnRole::kLabelInstall)
                                       : table.FindColumn(label);
  if (column == nullptr) {
    throw Error(label.empty() ? "table has no install label column"
                              : "table has no label column '" + label + "'");
  }
  if (!IsLabelRole(column->role())) {
    throw Error("column '" + column->name() + "' is not a label column");
  }
  const auto flags = column->flags();
  return {flags.begin(), flags.end()};
}

double LogLossOfScores(std::span<const std::uint8_t> labels, std::span<const double> scores,
                       std::vector<double>& buffer) {
  buffer.resize(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) buffer[i] = Sigmoid(scores[i]);
  return LogLoss(EvalBatch(labels, buffer));
}

}  // namespace

GbdtModel Fit(const GbdtParams& params, const Table& train, const Table& valid,
              const std::vector<std::string>& features, const std::string& label) {
  params.Validate();
  if (valid.n_rows() == 0) throw Error("gbdt: validation table is empty (needed for early stopping)");
  if (train.n_rows() == 0) throw Error("gbdt: train table is empty");
  const auto train_labels = LabelsOf(train, label);
  const auto valid_labels = LabelsOf(valid, label);
  const std::string label_name = label.empty() ? train.FindByRole(ColumnRole::kLabelInstall)->name() : label;
  const auto positives = std::count(train_labels.begin(), train_labels.end(), 1);
  const auto negatives = static_cast<std::int64_t>(train_labels.size()) - positives;
  if (positives == 0 || negatives == 0) {
    throw Error("gbdt: train labels are single-class; a binary classifier needs both classes");
  }

  BinMapper mapper = BinMapper::Fit(train, features, params.max_bins, params.seed);
  const BinnedData train_data = mapper.Apply(train, params.num_threads);
  const BinnedData valid_data = mapper.Apply(valid, params.num_threads);
  const int threads = internal::ResolveThreads(params.num_threads);

  // log(n_pos) - log(n_neg) keeps the prior exactly antisymmetric under
  // label flipping.
  const double base_score =
      std::log(static_cast<double>(positives)) - std::log(static_cast<double>(negatives));
  const auto n_train = static_cast<std::int64_t>(train.n_rows());
  const auto n_valid = static_cast<std::int64_t>(valid.n_rows());
  std::vector<double> train_scores(n_train, base_score);
  std::vector<double> valid_scores(n_valid, base_score);
  std::vector<double> grad(n_train), hess(n_train), buffer;

  TreeGrower grower(params, train_data, mapper.features());
  std::vector<std::pair<int, std::span<const std::uint32_t>>> leaf_rows;
  std::vector<Tree> trees;
  std::vector<IterationRecord> curve;
  double best_loss = LogLossOfScores(valid_labels, valid_scores, buffer);
  int best_iteration = 0;
  const int n_features = static_cast<int>(features.size());
  const int n_sampled = std::max(
      1, static_cast<int>(std::lround(params.feature_fraction * n_features)));

  for (int iteration = 1; iteration <= params.num_iterations; ++iteration) {
#pragma omp parallel for schedule(static) num_threads(threads)
    for (std::int64_t i = 0; i < n_train; ++i) {
      const auto d = LossGradHess(train_scores[i], train_labels[i]);
      grad[i] = d.grad;
      hess[i] = d.hess;
    }

    std::vector<int> active(n_features);
    std::iota(active.begin(), active.end(), 0);
    if (n_sampled < n_features) {
      Rng rng(DeriveSeed(params.seed, static_cast<std::uint64_t>(iteration)));
      rng.Shuffle(active);
      active.resize(n_sampled);
      std::sort(active.begin(), active.end());
    }

    Tree tree = grower.Grow(grad, hess, active, leaf_rows);
    if (tree.NumLeaves() < 2) break;  // No positive-gain split: nothing left to learn.

    for (const auto& [node, rows] : leaf_rows) {
      const double value = tree.nodes[node].value;
      for (const auto row : rows) train_scores[row] += value;
    }
#pragma omp parallel for schedule(static) num_threads(threads)
    for (std::int64_t i = 0; i < n_valid; ++i) {
      valid_scores[i] += tree.nodes[tree.Route(valid_data, i)].value;
    }
    trees.push_back(std::move(tree));

    const double train_loss = LogLossOfScores(train_labels, train_scores, buffer);
    const double valid_loss = LogLossOfScores(valid_labels, valid_scores, buffer);
    curve.push_back({iteration, train_loss, valid_loss});
    if (valid_loss < best_loss) {
      best_loss = valid_loss;
      best_iteration = iteration;
    } else if (iteration - best_iteration >= params.early_stopping_rounds) {
      break;
    }
  }
  trees.resize(best_iteration);
  return GbdtModel(params, std::move(mapper), std::move(trees), base_score, label_name,
                   std::move(curve));
}

}  // namespace rlt
