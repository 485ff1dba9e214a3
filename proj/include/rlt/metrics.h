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

// Binary-classification metrics: log loss, ROC AUC and normalized cross
// entropy (NCE). Labels are {0,1}; predictions are probabilities and are
// clamped into [kProbabilityEpsilon, 1 - kProbabilityEpsilon] before any log.
// All logarithms are natural.

#ifndef RLT_METRICS_H_
#define RLT_METRICS_H_

#include <cstdint>
#include <span>

namespace rlt {

inline constexpr double kProbabilityEpsilon = 1e-15;

// Non-owning view over paired labels and predictions. Throws if the lengths
// differ, the batch is empty, or a label is outside {0,1}.
class EvalBatch {
 public:
  EvalBatch(std::span<const std::uint8_t> labels, std::span<const double> predictions);

  std::span<const std::uint8_t> labels() const { return labels_; }
  std::span<const double> predictions() const { return predictions_; }
  std::size_t size() const { return labels_.size(); }
  std::size_t positives() const { return positives_; }

 private:
  std::span<const std::uint8_t> labels_;
  std::span<const double> predictions_;
  std::size_t positives_ = 0;
};

struct NceResult {
  double nce;
  double mean_logloss;
  double background_rate;
  double background_entropy;
};

double ClampProbability(double p);

double LogLoss(const EvalBatch& batch);

// Mann-Whitney AUC with average ranks for tied scores. Exact: the rank sum
// is accumulated in integers. Throws on a single-class batch.
double Auc(const EvalBatch& batch);

// Mean log loss divided by the entropy of the empirical positive rate.
// Throws on a single-class batch (zero denominator).
NceResult Nce(const EvalBatch& batch);

// Logistic function, numerically stable for large |x|.
double Sigmoid(double x);

}  // namespace rlt

#endif  // RLT_METRICS_H_
