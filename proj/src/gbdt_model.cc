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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "parallel.h"
#include "rlt/common.h"
#include "rlt/gbdt.h"
#include "rlt/metrics.h"

namespace rlt {
namespace {

constexpr int kModelFormatVersion = 1;

}  // namespace

bool TreeNode::GoesLeft(std::uint8_t bin) const {
  if (kind == SplitKind::kCategorical) return left_bins.test(bin);
  if (bin == kMissingBin) return default_left;
  return bin <= threshold_bin;
}

int Tree::NumLeaves() const {
  return static_cast<int>(std::count_if(nodes.begin(), nodes.end(),
                                        [](const TreeNode& n) { return n.is_leaf; }));
}

int Tree::NumInternal() const { return static_cast<int>(nodes.size()) - NumLeaves(); }

int Tree::Depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> depth(nodes.size(), 0);
  int max_depth = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].is_leaf) continue;
    depth[nodes[i].left] = depth[nodes[i].right] = depth[i] + 1;
    max_depth = std::max(max_depth, depth[i] + 1);
  }
  return max_depth;
}

int Tree::Route(const BinnedData& data, std::size_t row) const {
  int index = 0;
  while (!nodes[index].is_leaf) {
    const TreeNode& node = nodes[index];
    index = node.GoesLeft(data.bins[node.feature][row]) ? node.left : node.right;
  }
  return index;
}

nlohmann::json Tree::ToJson() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& node : nodes) {
    if (node.is_leaf) {
      out.push_back({{"leaf", true}, {"value", node.value}, {"count", node.count}});
      continue;
    }
    nlohmann::json json = {{"leaf", false},
                           {"feature", node.feature},
                           {"default_left", node.default_left},
                           {"left", node.left},
                           {"right", node.right},
                           {"gain", node.gain},
                           {"count", node.count}};
    if (node.kind == SplitKind::kNumeric) {
      json["kind"] = "numeric";
      json["threshold_bin"] = node.threshold_bin;
      json["threshold"] = std::isfinite(node.threshold) ? nlohmann::json(node.threshold)
                                                        : nlohmann::json(nullptr);
    } else {
      json["kind"] = "categorical";
      std::vector<int> bins;
      for (int b = 0; b < 256; ++b) {
        if (node.left_bins.test(b)) bins.push_back(b);
      }
      json["left_bins"] = bins;
    }
    out.push_back(std::move(json));
  }
  return out;
}

Tree Tree::FromJson(const nlohmann::json& json) {
  Tree tree;
  for (const auto& entry : json) {
    TreeNode node;
    node.is_leaf = entry.at("leaf").get<bool>();
    node.count = entry.value("count", std::int64_t{0});
    if (node.is_leaf) {
      node.value = entry.at("value").get<double>();
    } else {
      node.feature = entry.at("feature").get<int>();
      node.default_left = entry.at("default_left").get<bool>();
      node.left = entry.at("left").get<int>();
      node.right = entry.at("right").get<int>();
      node.gain = entry.value("gain", 0.0);
      if (entry.at("kind").get<std::string>() == "numeric") {
        node.kind = SplitKind::kNumeric;
        node.threshold_bin = entry.at("threshold_bin").get<int>();
        const auto& t = entry.at("threshold");
        node.threshold = t.is_null() ? std::numeric_limits<double>::infinity() : t.get<double>();
      } else {
        node.kind = SplitKind::kCategorical;
        for (const int b : entry.at("left_bins").get<std::vector<int>>()) {
          if (b < 0 || b > 255) throw Error("tree: categorical bin out of range");
          node.left_bins.set(b);
        }
      }
    }
    tree.nodes.push_back(std::move(node));
  }
  const auto n = static_cast<int>(tree.nodes.size());
  if (n == 0) throw Error("tree has no nodes");
  for (const auto& node : tree.nodes) {
    if (!node.is_leaf && (node.left <= 0 || node.left >= n || node.right <= 0 || node.right >= n)) {
      throw Error("tree: child index out of range");
    }
  }
  return tree;
}

GbdtModel::GbdtModel(GbdtParams params, BinMapper bin_mapper, std::vector<Tree> trees,
                     double base_score, std::string label_name,
                     std::vector<IterationRecord> curve)
    : params_(std::move(params)),
      bin_mapper_(std::move(bin_mapper)),
      trees_(std::move(trees)),
      base_score_(base_score),
      label_name_(std::move(label_name)),
      curve_(std::move(curve)),
      split_counts_(bin_mapper_.size(), 0) {
  for (const auto& tree : trees_) {
    for (const auto& node : tree.nodes) {
      if (node.is_leaf) continue;
      if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= split_counts_.size()) {
        throw Error("tree references unknown feature index " + std::to_string(node.feature));
      }
      ++split_counts_[node.feature];
    }
  }
}

std::vector<double> GbdtModel::PredictRaw(const BinnedData& data) const {
  std::vector<double> scores(data.n_rows, base_score_);
  const auto n = static_cast<std::int64_t>(data.n_rows);
#pragma omp parallel for schedule(static) num_threads(internal::ResolveThreads(params_.num_threads))
  for (std::int64_t i = 0; i < n; ++i) {
    double s = base_score_;
    for (const auto& tree : trees_) s += tree.nodes[tree.Route(data, i)].value;
    scores[i] = s;
  }
  return scores;
}

std::vector<double> GbdtModel::PredictRaw(const Table& table) const {
  return PredictRaw(bin_mapper_.Apply(table, params_.num_threads));
}

std::vector<double> GbdtModel::Predict(const Table& table) const {
  auto scores = PredictRaw(table);
  for (auto& s : scores) s = Sigmoid(s);
  return scores;
}

std::vector<std::pair<std::string, std::int64_t>> GbdtModel::FeatureImportance() const {
  std::vector<std::pair<std::string, std::int64_t>> out;
  const auto names = bin_mapper_.FeatureNames();
  for (std::size_t f = 0; f < names.size(); ++f) out.emplace_back(names[f], split_counts_[f]);
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

nlohmann::json GbdtModel::ToJson() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : trees_) trees.push_back(tree.ToJson());
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& r : curve_) {
    curve.push_back({{"iteration", r.iteration},
                     {"train_logloss", r.train_logloss},
                     {"valid_logloss", r.valid_logloss}});
  }
  nlohmann::json importance = nlohmann::json::array();
  for (const auto& [name, count] : FeatureImportance()) {
    importance.push_back({{"feature", name}, {"splits", count}});
  }
  return {{"format", "rlt-gbdt"},
          {"version", kModelFormatVersion},
          {"params", params_.ToJson()},
          {"label", label_name_},
          {"base_score", base_score_},
          {"best_iteration", best_iteration()},
          {"features", bin_mapper_.ToJson()},
          {"trees", trees},
          {"split_importance", importance},
          {"training_curve", curve}};
}

GbdtModel GbdtModel::FromJson(const nlohmann::json& json) {
  try {
    if (json.value("format", "") != "rlt-gbdt" || json.value("version", 0) != kModelFormatVersion) {
      throw Error("not an rlt-gbdt model document of version " + std::to_string(kModelFormatVersion));
    }
    std::vector<Tree> trees;
    for (const auto& t : json.at("trees")) trees.push_back(Tree::FromJson(t));
    std::vector<IterationRecord> curve;
    for (const auto& r : json.value("training_curve", nlohmann::json::array())) {
      curve.push_back({r.at("iteration").get<int>(), r.at("train_logloss").get<double>(),
                       r.at("valid_logloss").get<double>()});
    }
    return GbdtModel(GbdtParams::FromJson(json.at("params")),
                     BinMapper::FromJson(json.at("features")), std::move(trees),
                     json.at("base_score").get<double>(), json.value("label", ""),
                     std::move(curve));
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("invalid model document: ") + e.what());
  }
}

void GbdtModel::Save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << ToJson().dump(1) << '\n';
}

GbdtModel GbdtModel::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model '" + path + "'");
  try {
    return FromJson(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("cannot parse model '" + path + "': " + e.what());
  }
}

}  // namespace rlt
