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

// Per-feature adversarial validation.
//
// For each feature, a one-feature classifier is trained to tell train-origin
// rows (label 0) from test-origin rows (label 1). Its AUC on a stratified
// holdout measures how separable the two distributions are: about 0.5 when
// they agree, approaching 1 under covariate shift. Features at or above the
// AUC threshold are dropped.

#ifndef RLT_ADVVAL_H_
#define RLT_ADVVAL_H_

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "rlt/gbdt.h"
#include "rlt/table.h"

namespace rlt {

// num_leaves 31, 100 iterations, early stopping 20, learning rate 0.1.
GbdtParams DefaultAdversarialParams();

struct AdvConfig {
  double auc_threshold = 0.75;
  GbdtParams classifier_params = DefaultAdversarialParams();
  double holdout_fraction = 0.2;
  std::uint64_t seed = 0;
  std::optional<std::size_t> subsample_per_side = 200000;
  // Which side is labeled 1. Sampling and holdout selection do not depend
  // on it, and the classifier's scores mirror under the flip, so the AUC is
  // unchanged.
  bool test_is_positive = true;
  int num_threads = 0;

  void Validate() const;
  nlohmann::json ToJson() const;
  // Keys absent from `json` keep their current values.
  void Override(const nlohmann::json& json);
};

enum class Verdict { kKeep, kDrop, kSkipped };
std::string_view VerdictName(Verdict verdict);

struct FeatureAudit {
  std::string name;
  double auc = 0.5;
  Verdict verdict = Verdict::kKeep;
  std::string reason;  // Set when skipped.
};

struct AdvReport {
  std::vector<FeatureAudit> features;  // Schema order.
  std::size_t n_train_rows = 0;
  std::size_t n_test_rows = 0;
  AdvConfig config;

  std::set<std::string> Dropped() const;
  const FeatureAudit* Find(std::string_view name) const;
  nlohmann::json ToJson() const;
  // feature,auc,verdict
  std::string ToCsv() const;
};

// Holdout AUC of a classifier separating `train_column` rows from
// `test_column` rows. Both columns must have the same role.
double AdversarialAuc(const Column& train_column, const Column& test_column,
                      const AdvConfig& config);

// Audits every feature column (not row id, day or labels) of the two tables.
// Per-feature failures become Skipped entries. Throws when either table is
// empty or the feature columns differ.
AdvReport Audit(const Table& train, const Table& test, const AdvConfig& config);
// Audits only the named columns.
AdvReport Audit(const Table& train, const Table& test, const AdvConfig& config,
                const std::vector<std::string>& features);

// Removes the report's Drop features from `table`.
Table FilterFeatures(const AdvReport& report, const Table& table);

}  // namespace rlt

#endif  // RLT_ADVVAL_H_
