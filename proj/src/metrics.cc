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

#include "rlt/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "rlt/common.h"

namespace rlt {

EvalBatch::EvalBatch(std::span<const std::uint8_t> labels,
                     std::span<const double> predictions)
    : labels_(labels), predictions_(predictions) {
  if (labels.size() != predictions.size()) {
    throw Error("evaluation batch: " + std::to_string(labels.size()) + " labels but " +
                std::to_string(predictions.size()) + " predictions");
  }
  if (labels.empty()) throw Error("evaluation batch is empty");
  for (const auto label : labels) {
    if (label > 1) throw Error("evaluation batch: label outside {0,1}");
    positives_ += label;
  }
  for (const double p : predictions) {
    if (std::isnan(p)) throw Error("evaluation batch: prediction is NaN");
  }
}

double ClampProbability(double p) {
  return std::clamp(p, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
}

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double LogLoss(const EvalBatch& batch) {
  const auto labels = batch.labels();
  const auto preds = batch.predictions();
  double sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    // y = 2*label - 1; (1+y)/2 and (1-y)/2 select the active term.
    const int y = 2 * static_cast<int>(labels[i]) - 1;
    const double p = ClampProbability(preds[i]);
    sum += (1 + y) / 2 * std::log(p) + (1 - y) / 2 * std::log(1.0 - p);
  }
  return -sum / static_cast<double>(labels.size());
}

double Auc(const EvalBatch& batch) {
  const std::size_t n = batch.size();
  const std::uint64_t n_pos = batch.positives();
  const std::uint64_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw Error("AUC is undefined for a single-class batch");
  }
  const auto preds = batch.predictions();
  const auto labels = batch.labels();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return preds[a] < preds[b]; });

  // Twice the rank sum of positives; a tie group spanning sorted positions
  // [i, j) has average 1-based rank (i + 1 + j) / 2.
  std::uint64_t twice_rank_sum = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && preds[order[j]] == preds[order[i]]) ++j;
    std::uint64_t group_pos = 0;
    for (std::size_t k = i; k < j; ++k) group_pos += labels[order[k]];
    twice_rank_sum += group_pos * (i + 1 + j);
    i = j;
  }
  const std::uint64_t twice_u = twice_rank_sum - n_pos * (n_pos + 1);
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(n_pos * n_neg));
}

NceResult Nce(const EvalBatch& batch) {
  const std::size_t n = batch.size();
  if (batch.positives() == 0 || batch.positives() == n) {
    throw Error(
        "NCE is undefined for a single-class batch: the background entropy "
        "denominator is zero");
  }
  const double p = static_cast<double>(batch.positives()) / static_cast<double>(n);
  const double entropy = -(p * std::log(p) + (1.0 - p) * std::log(1.0 - p));
  const double loss = LogLoss(batch);
  return {loss / entropy, loss, p, entropy};
}

}  // namespace rlt
