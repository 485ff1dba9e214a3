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

#include "rlt/denoise.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rlt/common.h"

namespace rlt {

nlohmann::json DeltaEstimate::ToJson() const {
  return {{"feature", feature},     {"detected", detected},
          {"delta", delta},         {"v_min", v_min},
          {"n_unique", n_unique},   {"max_abs_residual", max_abs_residual}};
}

DeltaEstimate DetectDelta(std::span<const double> values, double tol_rel, std::string feature) {
  DeltaEstimate estimate;
  estimate.feature = std::move(feature);
  std::vector<double> unique;
  unique.reserve(values.size());
  for (const double v : values) {
    if (std::isfinite(v)) unique.push_back(v);
  }
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  estimate.n_unique = unique.size();
  if (unique.size() < 3) return estimate;

  const double v_min = unique.front();
  estimate.v_min = v_min;
  double delta = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < unique.size(); ++i) delta = std::min(delta, unique[i] - unique[i - 1]);
  if (!(delta > 0) || !std::isfinite(delta)) return estimate;

  double max_residual = 0.0;
  for (const double v : unique) {
    const double offset = v - v_min;
    const double residual = std::abs(offset - std::round(offset / delta) * delta);
    max_residual = std::max(max_residual, residual);
  }
  estimate.delta = delta;
  estimate.max_abs_residual = max_residual;
  estimate.detected = max_residual <= tol_rel * delta;
  if (!estimate.detected) return estimate;

  double sum = 0.0;
  std::size_t terms = 0;
  for (const double v : unique) {
    const double offset = v - v_min;
    const double k = std::round(offset / delta);
    if (k > 0) {
      sum += offset / k;
      ++terms;
    }
  }
  const double refined = sum / static_cast<double>(terms);
  estimate.delta = refined;
  max_residual = 0.0;
  for (const double v : unique) {
    const double offset = v - v_min;
    max_residual = std::max(max_residual, std::abs(offset - std::round(offset / refined) * refined));
  }
  estimate.max_abs_residual = max_residual;
  return estimate;
}

QuantizeOrigin ParseQuantizeOrigin(std::string_view name) {
  if (name == "zero") return QuantizeOrigin::kZero;
  if (name == "vmin") return QuantizeOrigin::kMin;
  throw Error("unknown quantization origin '" + std::string(name) + "' (expected zero or vmin)");
}

std::vector<std::optional<std::int64_t>> Quantize(std::span<const double> values,
                                                  const DeltaEstimate& estimate,
                                                  QuantizeOrigin origin) {
  if (!estimate.detected) {
    throw Error("cannot quantize '" + estimate.feature + "': no arithmetic progression detected");
  }
  const double shift = origin == QuantizeOrigin::kMin ? estimate.v_min : 0.0;
  std::vector<std::optional<std::int64_t>> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::isfinite(values[i])) {
      out[i] = static_cast<std::int64_t>(std::llround((values[i] - shift) / estimate.delta));
    }
  }
  return out;
}

Column QuantizedColumn(std::string name, const std::vector<std::optional<std::int64_t>>& q,
                       bool as_categorical) {
  if (as_categorical) {
    std::vector<std::string> tokens(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (q[i]) tokens[i] = std::to_string(*q[i]);
    }
    return Column::FromTokens(std::move(name), tokens);
  }
  std::vector<double> values(q.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i]) values[i] = static_cast<double>(*q[i]);
  }
  return Column::Continuous(std::move(name), std::move(values));
}

std::vector<std::vector<std::string>> GroupByDelta(const std::vector<DeltaEstimate>& estimates,
                                                   double rel_tol) {
  std::vector<const DeltaEstimate*> detected;
  for (const auto& e : estimates) {
    if (e.detected) detected.push_back(&e);
  }
  std::stable_sort(detected.begin(), detected.end(),
                   [](const auto* a, const auto* b) { return a->delta < b->delta; });
  std::vector<std::vector<std::string>> groups;
  double anchor = 0.0;
  for (const auto* e : detected) {
    if (groups.empty() || std::abs(e->delta - anchor) > rel_tol * anchor) {
      groups.emplace_back();
      anchor = e->delta;
    }
    groups.back().push_back(e->feature);
  }
  return groups;
}

nlohmann::json DenoiseResult::ToJson() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& e : estimates) list.push_back(e.ToJson());
  return {{"estimates", list}, {"delta_groups", groups}};
}

DenoiseResult DenoiseTable(const Table& table, const DenoiseOptions& options) {
  std::vector<std::string> features = options.features;
  if (features.empty()) {
    for (const auto& spec : table.schema().columns()) {
      if (spec.role == ColumnRole::kContinuous) features.push_back(spec.name);
    }
  }
  DenoiseResult result;
  result.table = table;
  for (const auto& name : features) {
    const Column& column = table.column(name);
    if (column.role() != ColumnRole::kContinuous) {
      throw Error("denoise: column '" + name + "' is not continuous");
    }
    DeltaEstimate estimate = DetectDelta(column.values(), options.tol_rel, name);
    if (estimate.detected) {
      const auto q = Quantize(column.values(), estimate, options.origin);
      result.table = result.table.ReplaceColumn(QuantizedColumn(name, q, options.as_categorical));
    }
    result.estimates.push_back(std::move(estimate));
  }
  result.groups = GroupByDelta(result.estimates);
  return result;
}

std::string CorrelationMatrix::ToCsv() const {
  std::ostringstream out;
  out << "feature";
  for (const auto& f : features) out << ',' << f;
  out << '\n';
  for (std::size_t i = 0; i < features.size(); ++i) {
    out << features[i];
    for (std::size_t j = 0; j < features.size(); ++j) {
      const double v = at(i, j);
      out << ',' << (std::isnan(v) ? std::string("NaN") : FormatDouble(v));
    }
    out << '\n';
  }
  return out.str();
}

CorrelationMatrix ComputeCorrelation(const Table& table, const std::vector<std::string>& features) {
  if (features.size() < 2) throw Error("correlation needs at least two features");
  const std::size_t k = features.size();
  const std::size_t n = table.n_rows();
  std::vector<std::vector<double>> data(k);
  for (std::size_t f = 0; f < k; ++f) {
    const Column& column = table.column(features[f]);
    if (column.role() != ColumnRole::kContinuous && column.role() != ColumnRole::kBinary) {
      throw Error("correlation: column '" + features[f] + "' is not numeric");
    }
    data[f].resize(n);
    for (std::size_t r = 0; r < n; ++r) data[f][r] = column.NumericValue(r);
  }

  CorrelationMatrix matrix;
  matrix.features = features;
  matrix.values.assign(k * k, std::numeric_limits<double>::quiet_NaN());
  std::vector<bool> degenerate(k, false);
  for (std::size_t f = 0; f < k; ++f) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const double v : data[f]) {
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    if (!(hi > lo)) {
      degenerate[f] = true;
      matrix.warnings.push_back("feature '" + features[f] + "' has zero variance; correlations are NaN");
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (degenerate[i]) continue;
    matrix.values[i * k + i] = 1.0;
    for (std::size_t j = i + 1; j < k; ++j) {
      if (degenerate[j]) continue;
      double sum_x = 0, sum_y = 0;
      std::size_t m = 0;
      for (std::size_t r = 0; r < n; ++r) {
        const double x = data[i][r], y = data[j][r];
        if (std::isfinite(x) && std::isfinite(y)) {
          sum_x += x;
          sum_y += y;
          ++m;
        }
      }
      double value = std::numeric_limits<double>::quiet_NaN();
      if (m >= 2) {
        const double mean_x = sum_x / m, mean_y = sum_y / m;
        double sxx = 0, syy = 0, sxy = 0;
        for (std::size_t r = 0; r < n; ++r) {
          const double x = data[i][r], y = data[j][r];
          if (std::isfinite(x) && std::isfinite(y)) {
            sxx += (x - mean_x) * (x - mean_x);
            syy += (y - mean_y) * (y - mean_y);
            sxy += (x - mean_x) * (y - mean_y);
          }
        }
        if (sxx > 0 && syy > 0) value = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
      } else {
        matrix.warnings.push_back("features '" + features[i] + "' and '" + features[j] +
                                  "' share fewer than two complete rows");
      }
      matrix.values[i * k + j] = matrix.values[j * k + i] = value;
    }
  }
  return matrix;
}

}  // namespace rlt
