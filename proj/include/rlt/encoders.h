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

// Day-ordered categorical encoders. Every statistic used to encode a row at
// day d comes from rows with day < d, so encodings never see their own day.

#ifndef RLT_ENCODERS_H_
#define RLT_ENCODERS_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rlt/table.h"

namespace rlt {

enum class FreqWindow { kPrevDay, kPrevWeek, kAllHistory };
std::string_view WindowName(FreqWindow window);  // prev_day, prev_week, all_history
FreqWindow ParseWindow(std::string_view name);

enum class EncoderKind { kFrequency, kTarget };
std::string_view EncoderKindName(EncoderKind kind);
EncoderKind ParseEncoderKind(std::string_view name);

inline constexpr double kDefaultTargetSmoothing = 1.0;
inline constexpr double kColdStartEncoding = 0.5;

class EncoderState {
 public:
  EncoderState() = default;

  EncoderKind kind() const { return kind_; }
  const std::string& feature() const { return feature_; }
  FreqWindow window() const { return window_; }
  // "click" or "install"; empty for frequency encoders.
  const std::string& target() const { return target_; }
  double smoothing() const { return a_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::int32_t first_day() const { return first_day_; }
  std::int32_t last_day() const { return first_day_ + n_days_ - 1; }

  // `{feature}__freq_{window}` or `{feature}__te_{target}`.
  std::string OutputName() const;

  // Encoding of category `index` (into tokens(), or -1 for unseen) at `day`.
  double Encode(std::int64_t index, std::int32_t day) const;
  // Occurrences of category `index` over days [lo, hi).
  std::int64_t CountBetween(std::int64_t index, std::int32_t lo, std::int32_t hi) const;

  nlohmann::json ToJson() const;
  static EncoderState FromJson(const nlohmann::json& json);

  friend EncoderState FitFrequency(const Table&, const std::string&, FreqWindow);
  friend EncoderState FitTarget(const Table&, const std::string&, const std::string&, double);

 private:
  // Row i of the cumulative arrays holds totals over days < first_day_ + i,
  // for i in [0, n_days_].
  std::size_t CumRow(std::int32_t day) const;
  void Accumulate(const std::vector<std::int64_t>& day_counts, const std::vector<std::int64_t>& day_sums);

  EncoderKind kind_ = EncoderKind::kFrequency;
  std::string feature_;
  FreqWindow window_ = FreqWindow::kPrevWeek;
  std::string target_;
  double a_ = kDefaultTargetSmoothing;
  std::vector<std::string> tokens_;
  std::int32_t first_day_ = 0;
  std::int32_t n_days_ = 0;
  std::vector<std::int64_t> cum_count_;
  std::vector<std::int64_t> cum_sum_;
  std::vector<std::int64_t> rows_before_;
  std::vector<std::int64_t> positives_before_;
};

// Throws if `feature` is not categorical or the table has no day column.
EncoderState FitFrequency(const Table& table, const std::string& feature, FreqWindow window);
// `target` is "click", "install", or the name of a label column. Throws if
// the label column is absent or a <= 0.
EncoderState FitTarget(const Table& table, const std::string& feature, const std::string& target,
                       double a = kDefaultTargetSmoothing);

// Continuous column named state.OutputName(). Categories are matched by
// token, so the table may come from a different ingest.
Column Transform(const EncoderState& state, const Table& table);

struct EncoderSpec {
  std::string feature;
  EncoderKind kind = EncoderKind::kFrequency;
  FreqWindow window = FreqWindow::kPrevWeek;
  std::string target;
  double a = kDefaultTargetSmoothing;

  nlohmann::json ToJson() const;
  static EncoderSpec FromJson(const nlohmann::json& json);
};

// One frequency encoder per categorical feature and/or one target encoder
// per (categorical feature, label).
std::vector<EncoderSpec> DefaultEncoderSpecs(const Table& table, bool frequency, bool target,
                                             FreqWindow window = FreqWindow::kPrevWeek,
                                             double a = kDefaultTargetSmoothing);

struct EncodeOptions {
  std::vector<EncoderSpec> specs;
  bool drop_original = false;
  int num_threads = 0;
};

struct EncodeResult {
  Table table;
  std::vector<EncoderState> states;

  nlohmann::json ToJson() const;  // Full states, suitable for re-application.
  nlohmann::json Summary() const;
};

// Fits every spec on `table` and appends the encoded columns in spec order.
EncodeResult FitAndEncode(const Table& table, const EncodeOptions& options);
// Re-applies fitted states to another table.
Table ApplyEncoders(const std::vector<EncoderState>& states, const Table& table, bool drop_original);

}  // namespace rlt

#endif  // RLT_ENCODERS_H_
