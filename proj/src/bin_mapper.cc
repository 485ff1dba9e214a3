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
#include <limits>
#include <unordered_map>

#include "rlt/common.h"
#include "rlt/gbdt.h"
#include "rlt/random.h"
#include "parallel.h"

namespace rlt {
namespace {

constexpr std::size_t kMaxBinningSample = 200000;

// A cut strictly below `hi` and at least `lo`, so that lo maps left of it and
// hi maps right.
double Midpoint(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid < hi ? mid : lo;
}

std::vector<double> NumericUpperBounds(std::vector<double> values, int max_bins) {
  std::sort(values.begin(), values.end());
  std::vector<double> distinct;
  std::vector<std::size_t> counts;
  for (const double v : values) {
    if (distinct.empty() || v != distinct.back()) {
      distinct.push_back(v);
      counts.push_back(1);
    } else {
      ++counts.back();
    }
  }
  std::vector<double> bounds;
  if (distinct.size() <= 1) return bounds;
  const auto max_finite_bins = static_cast<std::size_t>(max_bins - 1);
  if (distinct.size() <= max_finite_bins) {
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
      bounds.push_back(Midpoint(distinct[i], distinct[i + 1]));
    }
    return bounds;
  }
  // Greedy equal-frequency binning over distinct values.
  double remaining_rows = static_cast<double>(values.size());
  std::size_t remaining_bins = max_finite_bins;
  std::size_t in_bin = 0;
  for (std::size_t i = 0; i + 1 < distinct.size() && remaining_bins > 1; ++i) {
    in_bin += counts[i];
    const double target = remaining_rows / static_cast<double>(remaining_bins);
    if (static_cast<double>(in_bin) >= target) {
      bounds.push_back(Midpoint(distinct[i], distinct[i + 1]));
      remaining_rows -= static_cast<double>(in_bin);
      --remaining_bins;
      in_bin = 0;
    }
  }
  return bounds;
}

}  // namespace

std::uint8_t FeatureBins::BinOf(double value) const {
  if (std::isnan(value)) return kMissingBin;
  const auto it = std::lower_bound(upper_bounds.begin(), upper_bounds.end(), value);
  return static_cast<std::uint8_t>(1 + (it - upper_bounds.begin()));
}

double FeatureBins::UpperBound(int bin) const {
  if (bin >= 1 && static_cast<std::size_t>(bin) <= upper_bounds.size()) {
    return upper_bounds[bin - 1];
  }
  return std::numeric_limits<double>::infinity();
}

nlohmann::json FeatureBins::ToJson() const {
  nlohmann::json json = {{"name", name},
                         {"kind", kind == BinKind::kNumeric ? "numeric" : "categorical"},
                         {"num_bins", num_bins}};
  if (kind == BinKind::kNumeric) {
    json["upper_bounds"] = upper_bounds;
  } else {
    json["categories"] = categories;
  }
  return json;
}

FeatureBins FeatureBins::FromJson(const nlohmann::json& json) {
  FeatureBins bins;
  bins.name = json.at("name").get<std::string>();
  const auto kind = json.at("kind").get<std::string>();
  if (kind == "numeric") {
    bins.kind = BinKind::kNumeric;
    bins.upper_bounds = json.at("upper_bounds").get<std::vector<double>>();
    bins.num_bins = static_cast<int>(bins.upper_bounds.size()) + 2;
  } else if (kind == "categorical") {
    bins.kind = BinKind::kCategorical;
    bins.categories = json.at("categories").get<std::vector<std::string>>();
    bins.num_bins = static_cast<int>(bins.categories.size()) + 2;
  } else {
    throw Error("unknown bin kind '" + kind + "'");
  }
  if (bins.num_bins > kMaxBinsLimit) throw Error("feature '" + bins.name + "' has too many bins");
  return bins;
}

BinMapper BinMapper::Fit(const Table& table, const std::vector<std::string>& features,
                         int max_bins, std::uint64_t seed) {
  if (max_bins < 2 || max_bins > kMaxBinsLimit) throw Error("max_bins must be in [2, 255]");
  std::vector<FeatureBins> out;
  out.reserve(features.size());
  for (std::size_t f = 0; f < features.size(); ++f) {
    const Column& column = table.column(features[f]);
    FeatureBins bins;
    bins.name = features[f];
    if (column.role() == ColumnRole::kCategorical) {
      bins.kind = BinKind::kCategorical;
      const auto& dictionary = column.dictionary();
      const std::size_t identity =
          std::min(dictionary.size() - 1, static_cast<std::size_t>(max_bins - 2));
      bins.categories.assign(dictionary.begin() + 1, dictionary.begin() + 1 + identity);
      bins.num_bins = static_cast<int>(identity) + 2;
    } else if (column.role() == ColumnRole::kContinuous || column.role() == ColumnRole::kBinary) {
      bins.kind = BinKind::kNumeric;
      std::vector<double> finite;
      finite.reserve(column.size());
      for (std::size_t r = 0; r < column.size(); ++r) {
        const double v = column.NumericValue(r);
        if (!std::isnan(v)) finite.push_back(v);
      }
      if (finite.size() > kMaxBinningSample) {
        Rng rng(DeriveSeed(seed, 1000 + f));
        rng.Shuffle(finite);
        finite.resize(kMaxBinningSample);
      }
      bins.upper_bounds = NumericUpperBounds(std::move(finite), max_bins);
      bins.num_bins = static_cast<int>(bins.upper_bounds.size()) + 2;
    } else {
      throw Error("column '" + features[f] + "' (" + std::string(RoleName(column.role())) +
                  ") cannot be used as a model feature");
    }
    out.push_back(std::move(bins));
  }
  return BinMapper(std::move(out));
}

std::vector<std::string> BinMapper::FeatureNames() const {
  std::vector<std::string> names;
  names.reserve(features_.size());
  for (const auto& f : features_) names.push_back(f.name);
  return names;
}

BinnedData BinMapper::Apply(const Table& table, int num_threads) const {
  BinnedData data;
  data.n_rows = table.n_rows();
  data.bins.resize(features_.size());
  std::vector<const Column*> columns;
  for (const auto& f : features_) {
    const Column* column = table.FindColumn(f.name);
    if (column == nullptr) throw Error("table lacks model feature '" + f.name + "'");
    const bool categorical = column->role() == ColumnRole::kCategorical;
    if (categorical != (f.kind == BinKind::kCategorical)) {
      throw Error("feature '" + f.name + "' has a different type than at training time");
    }
    columns.push_back(column);
  }
  const auto n_features = static_cast<std::int64_t>(features_.size());
#pragma omp parallel for schedule(dynamic) num_threads(internal::ResolveThreads(num_threads))
  for (std::int64_t f = 0; f < n_features; ++f) {
    const FeatureBins& spec = features_[f];
    const Column& column = *columns[f];
    auto& out = data.bins[f];
    out.resize(data.n_rows);
    if (spec.kind == BinKind::kCategorical) {
      std::unordered_map<std::string_view, std::uint8_t> index;
      for (std::size_t i = 0; i < spec.categories.size(); ++i) {
        index.emplace(spec.categories[i], static_cast<std::uint8_t>(i + 1));
      }
      const auto& dictionary = column.dictionary();
      std::vector<std::uint8_t> code_to_bin(dictionary.size());
      for (std::size_t code = 0; code < dictionary.size(); ++code) {
        if (code == 0) {
          code_to_bin[code] = kMissingBin;
          continue;
        }
        const auto it = index.find(dictionary[code]);
        code_to_bin[code] = it == index.end() ? static_cast<std::uint8_t>(spec.overflow_bin())
                                              : it->second;
      }
      const auto codes = column.codes();
      for (std::size_t r = 0; r < data.n_rows; ++r) out[r] = code_to_bin[codes[r]];
    } else if (column.role() == ColumnRole::kContinuous) {
      const auto values = column.values();
      for (std::size_t r = 0; r < data.n_rows; ++r) out[r] = spec.BinOf(values[r]);
    } else {
      for (std::size_t r = 0; r < data.n_rows; ++r) out[r] = spec.BinOf(column.NumericValue(r));
    }
  }
  return data;
}

nlohmann::json BinMapper::ToJson() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& f : features_) out.push_back(f.ToJson());
  return out;
}

BinMapper BinMapper::FromJson(const nlohmann::json& json) {
  std::vector<FeatureBins> features;
  for (const auto& entry : json) features.push_back(FeatureBins::FromJson(entry));
  return BinMapper(std::move(features));
}

void BuildHistogram(std::span<const std::uint8_t> bins, std::span<const double> grad,
                    std::span<const double> hess, std::span<const std::uint32_t> rows,
                    std::span<HistBin> out) {
  std::fill(out.begin(), out.end(), HistBin{});
  for (const auto row : rows) {
    HistBin& bin = out[bins[row]];
    bin.grad += grad[row];
    bin.hess += hess[row];
    ++bin.count;
  }
}

void SubtractHistogram(std::span<const HistBin> parent, std::span<const HistBin> sibling,
                       std::span<HistBin> out) {
  for (std::size_t b = 0; b < out.size(); ++b) {
    out[b].grad = parent[b].grad - sibling[b].grad;
    out[b].hess = parent[b].hess - sibling[b].hess;
    out[b].count = parent[b].count - sibling[b].count;
  }
}

}  // namespace rlt
