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

#include "rlt/encoders.h"

#include <algorithm>
#include <limits>
#include <unordered_map>

#include "parallel.h"
#include "rlt/common.h"

namespace rlt {
namespace {

const Column& CategoricalFeature(const Table& table, const std::string& feature) {
  const Column* column = table.FindColumn(feature);
  if (column == nullptr) throw Error("encoder: no column named '" + feature + "'");
  if (column->role() != ColumnRole::kCategorical) {
    throw Error("encoder: column '" + feature + "' is " + std::string(RoleName(column->role())) +
                ", expected categorical");
  }
  return *column;
}

// Resolves "click"/"install" or a label column name to (column, short name).
std::pair<const Column*, std::string> ResolveTarget(const Table& table, const std::string& target) {
  const Column* column = nullptr;
  if (target == "click") {
    column = table.FindByRole(ColumnRole::kLabelClick);
  } else if (target == "install") {
    column = table.FindByRole(ColumnRole::kLabelInstall);
  } else {
    column = table.FindColumn(target);
    if (column != nullptr && !IsLabelRole(column->role())) {
      throw Error("encoder: target '" + target + "' is not a label column");
    }
  }
  if (column == nullptr) throw Error("encoder: target column '" + target + "' not found");
  return {column, column->role() == ColumnRole::kLabelClick ? "click" : "install"};
}

struct DailyStats {
  std::int32_t first_day = 0;
  std::int32_t n_days = 0;
  std::vector<std::int64_t> counts;  // n_days x n_cats
  std::vector<std::int64_t> sums;
};

DailyStats CollectDaily(const Table& table, const Column& feature, const Column* target) {
  DailyStats stats;
  const std::size_t n_cats = feature.dictionary().size();
  if (table.n_rows() == 0) return stats;
  const auto [lo, hi] = table.DayRange();
  stats.first_day = lo;
  stats.n_days = hi - lo + 1;
  stats.counts.assign(static_cast<std::size_t>(stats.n_days) * n_cats, 0);
  if (target != nullptr) stats.sums.assign(stats.counts.size(), 0);
  const auto days = table.day_column().days();
  const auto codes = feature.codes();
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    const std::size_t cell = static_cast<std::size_t>(days[r] - lo) * n_cats + codes[r];
    ++stats.counts[cell];
    if (target != nullptr) stats.sums[cell] += target->flags()[r];
  }
  return stats;
}

}  // namespace

std::string_view WindowName(FreqWindow window) {
  switch (window) {
    case FreqWindow::kPrevDay: return "prev_day";
    case FreqWindow::kPrevWeek: return "prev_week";
    case FreqWindow::kAllHistory: return "all_history";
  }
  return "?";
}

FreqWindow ParseWindow(std::string_view name) {
  for (const auto w : {FreqWindow::kPrevDay, FreqWindow::kPrevWeek, FreqWindow::kAllHistory}) {
    if (WindowName(w) == name) return w;
  }
  throw Error("unknown frequency window '" + std::string(name) +
              "' (expected prev_day, prev_week or all_history)");
}

std::string_view EncoderKindName(EncoderKind kind) {
  return kind == EncoderKind::kFrequency ? "frequency" : "target";
}

EncoderKind ParseEncoderKind(std::string_view name) {
  if (name == "frequency") return EncoderKind::kFrequency;
  if (name == "target") return EncoderKind::kTarget;
  throw Error("unknown encoder kind '" + std::string(name) + "' (expected frequency or target)");
}

std::string EncoderState::OutputName() const {
  if (kind_ == EncoderKind::kFrequency) return feature_ + "__freq_" + std::string(WindowName(window_));
  return feature_ + "__te_" + target_;
}

std::size_t EncoderState::CumRow(std::int32_t day) const {
  const std::int64_t offset = static_cast<std::int64_t>(day) - first_day_;
  return static_cast<std::size_t>(std::clamp<std::int64_t>(offset, 0, n_days_));
}

void EncoderState::Accumulate(const std::vector<std::int64_t>& day_counts,
                              const std::vector<std::int64_t>& day_sums) {
  const std::size_t n_cats = tokens_.size();
  const std::size_t n_days = static_cast<std::size_t>(n_days_);
  cum_count_.assign((n_days + 1) * n_cats, 0);
  rows_before_.assign(n_days + 1, 0);
  const bool target = kind_ == EncoderKind::kTarget;
  if (target) {
    cum_sum_.assign(cum_count_.size(), 0);
    positives_before_.assign(n_days + 1, 0);
  }
  for (std::size_t d = 0; d < n_days; ++d) {
    std::int64_t rows = 0, positives = 0;
    for (std::size_t c = 0; c < n_cats; ++c) {
      const std::int64_t count = day_counts[d * n_cats + c];
      cum_count_[(d + 1) * n_cats + c] = cum_count_[d * n_cats + c] + count;
      rows += count;
      if (target) {
        const std::int64_t sum = day_sums[d * n_cats + c];
        cum_sum_[(d + 1) * n_cats + c] = cum_sum_[d * n_cats + c] + sum;
        positives += sum;
      }
    }
    rows_before_[d + 1] = rows_before_[d] + rows;
    if (target) positives_before_[d + 1] = positives_before_[d] + positives;
  }
}

std::int64_t EncoderState::CountBetween(std::int64_t index, std::int32_t lo, std::int32_t hi) const {
  if (index < 0 || static_cast<std::size_t>(index) >= tokens_.size() || hi <= lo) return 0;
  const std::size_t n_cats = tokens_.size();
  return cum_count_[CumRow(hi) * n_cats + index] - cum_count_[CumRow(lo) * n_cats + index];
}

double EncoderState::Encode(std::int64_t index, std::int32_t day) const {
  // Days past the fitted range see everything through the last fitted day.
  const std::int32_t d = std::min<std::int64_t>(day, static_cast<std::int64_t>(first_day_) + n_days_);
  if (kind_ == EncoderKind::kFrequency) {
    std::int32_t lo = first_day_;
    if (window_ == FreqWindow::kPrevDay) lo = d - 1;
    if (window_ == FreqWindow::kPrevWeek) lo = d - 7;
    return static_cast<double>(CountBetween(index, lo, d));
  }
  if (n_days_ == 0) return kColdStartEncoding;
  const std::size_t row = CumRow(d);
  if (rows_before_[row] == 0) return kColdStartEncoding;
  const double prior =
      static_cast<double>(positives_before_[row]) / static_cast<double>(rows_before_[row]);
  double count = 0.0, sum = 0.0;
  if (index >= 0 && static_cast<std::size_t>(index) < tokens_.size()) {
    count = static_cast<double>(cum_count_[row * tokens_.size() + index]);
    sum = static_cast<double>(cum_sum_[row * tokens_.size() + index]);
  }
  return (sum + a_ * prior) / (count + a_);
}

nlohmann::json EncoderState::ToJson() const {
  nlohmann::json json = {{"kind", EncoderKindName(kind_)}, {"feature", feature_},
                         {"output", OutputName()},        {"first_day", first_day_},
                         {"n_days", n_days_},             {"tokens", tokens_}};
  if (kind_ == EncoderKind::kFrequency) {
    json["window"] = WindowName(window_);
  } else {
    json["target"] = target_;
    json["a"] = a_;
  }
  // Sparse daily statistics: [day, token index, count(, positives)].
  nlohmann::json daily = nlohmann::json::array();
  const std::size_t n_cats = tokens_.size();
  for (std::int32_t d = 0; d < n_days_; ++d) {
    for (std::size_t c = 0; c < n_cats; ++c) {
      const std::size_t at = static_cast<std::size_t>(d) * n_cats + c;
      const std::int64_t count = cum_count_[at + n_cats] - cum_count_[at];
      if (count == 0) continue;
      nlohmann::json entry = {first_day_ + d, c, count};
      if (kind_ == EncoderKind::kTarget) entry.push_back(cum_sum_[at + n_cats] - cum_sum_[at]);
      daily.push_back(std::move(entry));
    }
  }
  json["daily"] = std::move(daily);
  return json;
}

EncoderState EncoderState::FromJson(const nlohmann::json& json) {
  EncoderState state;
  try {
    state.kind_ = ParseEncoderKind(json.at("kind").get<std::string>());
    state.feature_ = json.at("feature").get<std::string>();
    if (state.kind_ == EncoderKind::kFrequency) {
      state.window_ = ParseWindow(json.at("window").get<std::string>());
    } else {
      state.target_ = json.at("target").get<std::string>();
      state.a_ = json.at("a").get<double>();
    }
    state.first_day_ = json.at("first_day").get<std::int32_t>();
    state.n_days_ = json.at("n_days").get<std::int32_t>();
    state.tokens_ = json.at("tokens").get<std::vector<std::string>>();
    if (state.n_days_ < 0) throw Error("negative day count");
    const std::size_t n_cats = state.tokens_.size();
    std::vector<std::int64_t> counts(static_cast<std::size_t>(state.n_days_) * n_cats, 0);
    std::vector<std::int64_t> sums(state.kind_ == EncoderKind::kTarget ? counts.size() : 0, 0);
    for (const auto& entry : json.at("daily")) {
      const std::int64_t d = entry.at(0).get<std::int64_t>() - state.first_day_;
      const std::size_t c = entry.at(1).get<std::size_t>();
      if (d < 0 || d >= state.n_days_ || c >= n_cats) throw Error("daily entry out of range");
      counts[static_cast<std::size_t>(d) * n_cats + c] = entry.at(2).get<std::int64_t>();
      if (!sums.empty()) sums[static_cast<std::size_t>(d) * n_cats + c] = entry.at(3).get<std::int64_t>();
    }
    state.Accumulate(counts, sums);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed encoder state: ") + e.what());
  }
  return state;
}

EncoderState FitFrequency(const Table& table, const std::string& feature, FreqWindow window) {
  const Column& column = CategoricalFeature(table, feature);
  table.day_column();
  EncoderState state;
  state.kind_ = EncoderKind::kFrequency;
  state.feature_ = feature;
  state.window_ = window;
  state.tokens_ = column.dictionary();
  DailyStats stats = CollectDaily(table, column, nullptr);
  state.first_day_ = stats.first_day;
  state.n_days_ = stats.n_days;
  state.Accumulate(stats.counts, stats.sums);
  return state;
}

EncoderState FitTarget(const Table& table, const std::string& feature, const std::string& target,
                       double a) {
  const Column& column = CategoricalFeature(table, feature);
  table.day_column();
  if (!(a > 0)) throw Error("encoder: smoothing a must be positive");
  const auto [label, short_name] = ResolveTarget(table, target);
  EncoderState state;
  state.kind_ = EncoderKind::kTarget;
  state.feature_ = feature;
  state.target_ = short_name;
  state.a_ = a;
  state.tokens_ = column.dictionary();
  DailyStats stats = CollectDaily(table, column, label);
  state.first_day_ = stats.first_day;
  state.n_days_ = stats.n_days;
  state.Accumulate(stats.counts, stats.sums);
  return state;
}

Column Transform(const EncoderState& state, const Table& table) {
  if (table.n_rows() == 0) return Column::Continuous(state.OutputName(), {});
  const Column& column = CategoricalFeature(table, state.feature());
  std::unordered_map<std::string_view, std::int64_t> index;
  index.reserve(state.tokens().size());
  for (std::size_t i = 0; i < state.tokens().size(); ++i) index.emplace(state.tokens()[i], i);
  std::vector<std::int64_t> remap(column.dictionary().size(), -1);
  for (std::size_t code = 0; code < remap.size(); ++code) {
    const auto it = index.find(column.dictionary()[code]);
    if (it != index.end()) remap[code] = it->second;
  }
  const auto days = table.day_column().days();
  const auto codes = column.codes();
  std::vector<double> values(table.n_rows());
  for (std::size_t r = 0; r < values.size(); ++r) values[r] = state.Encode(remap[codes[r]], days[r]);
  return Column::Continuous(state.OutputName(), std::move(values));
}

nlohmann::json EncoderSpec::ToJson() const {
  nlohmann::json json = {{"feature", feature}, {"kind", EncoderKindName(kind)}};
  if (kind == EncoderKind::kFrequency) {
    json["window"] = WindowName(window);
  } else {
    json["target"] = target;
    json["a"] = a;
  }
  return json;
}

EncoderSpec EncoderSpec::FromJson(const nlohmann::json& json) {
  EncoderSpec spec;
  try {
    spec.feature = json.at("feature").get<std::string>();
    spec.kind = ParseEncoderKind(json.value("kind", std::string("frequency")));
    if (spec.kind == EncoderKind::kFrequency) {
      spec.window = ParseWindow(json.value("window", std::string("prev_week")));
    } else {
      spec.target = json.at("target").get<std::string>();
      spec.a = json.value("a", kDefaultTargetSmoothing);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed encoder spec: ") + e.what());
  }
  return spec;
}

std::vector<EncoderSpec> DefaultEncoderSpecs(const Table& table, bool frequency, bool target,
                                             FreqWindow window, double a) {
  std::vector<EncoderSpec> specs;
  std::vector<std::string> targets;
  if (table.FindByRole(ColumnRole::kLabelClick) != nullptr) targets.push_back("click");
  if (table.FindByRole(ColumnRole::kLabelInstall) != nullptr) targets.push_back("install");
  for (const auto& column : table.schema().columns()) {
    if (column.role != ColumnRole::kCategorical) continue;
    if (frequency) specs.push_back({column.name, EncoderKind::kFrequency, window, "", a});
    if (target) {
      for (const auto& t : targets) specs.push_back({column.name, EncoderKind::kTarget, window, t, a});
    }
  }
  return specs;
}

nlohmann::json EncodeResult::ToJson() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& state : states) list.push_back(state.ToJson());
  return {{"encoders", list}};
}

nlohmann::json EncodeResult::Summary() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& state : states) {
    nlohmann::json entry = {{"feature", state.feature()},
                            {"kind", EncoderKindName(state.kind())},
                            {"output", state.OutputName()},
                            {"n_categories", state.tokens().size()},
                            {"first_day", state.first_day()},
                            {"last_day", state.last_day()}};
    if (state.kind() == EncoderKind::kFrequency) {
      entry["window"] = WindowName(state.window());
    } else {
      entry["target"] = state.target();
      entry["a"] = state.smoothing();
    }
    list.push_back(std::move(entry));
  }
  return list;
}

namespace {

template <typename Fn>
void ParallelFor(std::size_t n, int threads, Fn&& fn) {
  std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic) num_threads(internal::ResolveThreads(threads))
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& error : errors) {
    if (!error.empty()) throw Error(error);
  }
}

Table AppendEncoded(const Table& table, std::vector<Column> encoded,
                    const std::vector<EncoderState>& states, bool drop_original) {
  Table out = table;
  for (auto& column : encoded) out = out.WithColumn(std::move(column));
  if (drop_original) {
    std::set<std::string> originals;
    for (const auto& state : states) originals.insert(state.feature());
    out = out.WithoutColumns(originals);
  }
  return out;
}

}  // namespace

EncodeResult FitAndEncode(const Table& table, const EncodeOptions& options) {
  EncodeResult result;
  result.states.resize(options.specs.size());
  ParallelFor(options.specs.size(), options.num_threads, [&](std::size_t i) {
    const EncoderSpec& spec = options.specs[i];
    result.states[i] = spec.kind == EncoderKind::kFrequency
                           ? FitFrequency(table, spec.feature, spec.window)
                           : FitTarget(table, spec.feature, spec.target, spec.a);
  });
  std::vector<Column> encoded(result.states.size(), Column::Continuous("", {}));
  ParallelFor(result.states.size(), options.num_threads,
              [&](std::size_t i) { encoded[i] = Transform(result.states[i], table); });
  result.table = AppendEncoded(table, std::move(encoded), result.states, options.drop_original);
  return result;
}

Table ApplyEncoders(const std::vector<EncoderState>& states, const Table& table, bool drop_original) {
  std::vector<Column> encoded(states.size(), Column::Continuous("", {}));
  ParallelFor(states.size(), 0, [&](std::size_t i) { encoded[i] = Transform(states[i], table); });
  return AppendEncoded(table, std::move(encoded), states, drop_original);
}

}  // namespace rlt
