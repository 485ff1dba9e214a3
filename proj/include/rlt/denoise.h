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

// Arithmetic-progression detection and quantization of continuous features,
// plus the pairwise Pearson correlation matrix used to spot correlated
// feature blocks.
//
// A feature is "on a lattice" when its sorted unique finite values satisfy
// v_n = v_1 + (n - 1) * delta up to gaps: every value sits within
// tol_rel * delta of v_1 + k * delta for an integer k.

#ifndef RLT_DENOISE_H_
#define RLT_DENOISE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rlt/table.h"

namespace rlt {

inline constexpr double kDefaultLatticeTolerance = 1e-3;

struct DeltaEstimate {
  std::string feature;
  double delta = 0.0;
  double v_min = 0.0;
  std::size_t n_unique = 0;
  double max_abs_residual = 0.0;
  bool detected = false;

  nlohmann::json ToJson() const;
};

// Never throws for degenerate input: fewer than 3 unique finite values gives
// detected = false.
DeltaEstimate DetectDelta(std::span<const double> values, double tol_rel = kDefaultLatticeTolerance,
                          std::string feature = "");

enum class QuantizeOrigin { kZero, kMin };
QuantizeOrigin ParseQuantizeOrigin(std::string_view name);

// round(v / delta), or round((v - v_min) / delta) with kMin. Missing values
// stay missing. Throws if the estimate is not a detection.
std::vector<std::optional<std::int64_t>> Quantize(std::span<const double> values,
                                                  const DeltaEstimate& estimate,
                                                  QuantizeOrigin origin = QuantizeOrigin::kZero);

// Quantized integers as a continuous column (NaN for missing) or as a
// categorical column whose tokens are the decimal integers.
Column QuantizedColumn(std::string name, const std::vector<std::optional<std::int64_t>>& q,
                       bool as_categorical);

// Groups detected features whose deltas agree within `rel_tol` of the
// group's first (smallest) delta. Reporting only.
std::vector<std::vector<std::string>> GroupByDelta(const std::vector<DeltaEstimate>& estimates,
                                                   double rel_tol = 0.01);

struct DenoiseOptions {
  double tol_rel = kDefaultLatticeTolerance;
  QuantizeOrigin origin = QuantizeOrigin::kZero;
  bool as_categorical = false;
  std::vector<std::string> features;  // Empty: every continuous column.
};

struct DenoiseResult {
  Table table;  // Detected columns replaced in place by their quantized form.
  std::vector<DeltaEstimate> estimates;
  std::vector<std::vector<std::string>> groups;

  nlohmann::json ToJson() const;
};

DenoiseResult DenoiseTable(const Table& table, const DenoiseOptions& options);

struct CorrelationMatrix {
  std::vector<std::string> features;
  std::vector<double> values;  // Row-major, features.size()^2.
  std::vector<std::string> warnings;

  double at(std::size_t i, std::size_t j) const { return values[i * features.size() + j]; }
  // Square CSV with a header row and a leading name column.
  std::string ToCsv() const;
};

// Pearson correlation over pairwise-complete rows. A zero-variance feature
// gets a NaN row and column and a warning.
CorrelationMatrix ComputeCorrelation(const Table& table, const std::vector<std::string>& features);

}  // namespace rlt

#endif  // RLT_DENOISE_H_
