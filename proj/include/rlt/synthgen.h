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

// Synthetic challenge-shaped datasets with planted structure.
//
// Layout of a generated table (column names in brackets):
//   row id [row_id], day [f_1], categoricals [c_0..], binaries [b_0..],
//   continuous [x_0..], click label [is_clicked], install label
//   [is_installed].
//
// Generation, per row:
//   - Continuous features start as standard normals. Features in a latent
//     group share a factor: x = loading * z + sqrt(1 - loading^2) * e, so
//     the correlation between two members is loading^2.
//   - A shifted feature gets `magnitude` added on the last day only.
//   - An arithmetic feature maps its normal draw through the normal CDF to a
//     multiplier k uniform on {0..max_multiplier} and stores v = k * delta.
//   - Categories follow a Zipf law over a random permutation of category ids.
//     Each category carries a latent effect (N(0, effect_scale^2)) and a
//     standardized log-popularity.
//   - The install logit is intercept + sum(coef * signal) where the signal of
//     an arithmetic feature is its multiplier k (not v), plus the category
//     terms. The click logit is click_intercept + click_scale * (install
//     logit - intercept).
//   - Missing cells are masked after labels are drawn.
//
// Randomness: MT19937-64 seeded from SynthSpec::seed through DeriveSeed, with
// distributions implemented in rlt/random.h.

#ifndef RLT_SYNTHGEN_H_
#define RLT_SYNTHGEN_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "rlt/table.h"

namespace rlt {

struct ShiftedFeature {
  int column;  // Continuous column index.
  double magnitude;
};

struct ArithmeticFeature {
  int column;
  double delta;
  int max_multiplier;
};

struct LatentGroup {
  std::vector<int> columns;
  double loading;
};

struct CategoricalEffect {
  int column;  // Categorical column index.
  double effect_scale = 0.0;
  double popularity_coef = 0.0;
};

struct LabelModel {
  double intercept = -2.0;
  std::vector<std::pair<int, double>> continuous_coefs;
  std::vector<std::pair<int, double>> binary_coefs;
  std::vector<CategoricalEffect> categorical_effects;
  double click_intercept = -0.5;
  double click_scale = 0.8;
};

struct SynthSpec {
  std::size_t n_rows_per_day = 4348;
  int first_day = 45;
  int last_day = 67;
  std::vector<int> cat_cardinalities;
  double zipf_exponent = 1.0;
  int n_cont = 0;
  int n_binary = 0;
  double binary_rate = 0.3;
  double cont_missing_rate = 0.0;
  std::vector<ShiftedFeature> shifted_features;
  std::vector<ArithmeticFeature> arithmetic_features;
  std::vector<LatentGroup> latent_groups;
  LabelModel label_model;
  std::uint64_t seed = 2023;

  int n_cat() const { return static_cast<int>(cat_cardinalities.size()); }
  // Throws rlt::Error on out-of-range indices or invalid parameters.
  void Validate() const;

  nlohmann::json ToJson() const;
  // Fields absent from `json` keep the values of Default().
  static SynthSpec FromJson(const nlohmann::json& json);
  // The benchmark used throughout the toolkit: ~100k rows over days 45..67,
  // four categoricals of growing cardinality, arithmetic features with the
  // steps 0.0385 and 0.5711, and one shifted pure-noise feature (x_5).
  static SynthSpec Default();
};

struct GroundTruth {
  std::vector<double> install_probability;
  std::vector<double> click_probability;
  // Per arithmetic feature name: the multiplier k of every row (also for
  // rows whose cell was masked as missing).
  std::map<std::string, std::vector<std::int64_t>> multipliers;
  std::map<std::string, double> deltas;
  std::map<std::string, double> shifts;
  int shift_day = 0;

  nlohmann::json ToJson(const SynthSpec& spec) const;
};

struct SynthResult {
  Table table;
  GroundTruth truth;
};

SynthResult Generate(const SynthSpec& spec);

std::string CategoricalName(int index);
std::string ContinuousName(int index);
std::string BinaryName(int index);
inline constexpr char kRowIdName[] = "row_id";
inline constexpr char kDayName[] = "f_1";
inline constexpr char kClickName[] = "is_clicked";
inline constexpr char kInstallName[] = "is_installed";

}  // namespace rlt

#endif  // RLT_SYNTHGEN_H_
