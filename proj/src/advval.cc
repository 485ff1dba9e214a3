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

#include "rlt/advval.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "parallel.h"
#include "rlt/common.h"
#include "rlt/metrics.h"
#include "rlt/random.h"

namespace rlt {
namespace {

constexpr char kFeatureName[] = "feature";
constexpr char kOriginName[] = "origin";

enum Stream : std::uint64_t { kTrainSide = 11, kTestSide = 12 };

// Indices of one side after optional subsampling, shuffled. The first
// `holdout` entries form the holdout; the next `stop` entries the
// early-stopping slice; the rest are fitted on.
struct SidePlan {
  std::vector<std::size_t> rows;
  std::size_t holdout = 0;
  std::size_t stop = 0;
};

SidePlan PlanSide(std::size_t n, const AdvConfig& config, std::uint64_t stream) {
  SidePlan plan;
  plan.rows.resize(n);
  std::iota(plan.rows.begin(), plan.rows.end(), 0);
  Rng rng(DeriveSeed(config.seed, stream));
  rng.Shuffle(plan.rows);
  if (config.subsample_per_side && plan.rows.size() > *config.subsample_per_side) {
    plan.rows.resize(*config.subsample_per_side);
  }
  const auto size = static_cast<double>(plan.rows.size());
  plan.holdout = static_cast<std::size_t>(std::lround(config.holdout_fraction * size));
  plan.stop = static_cast<std::size_t>(
      std::lround(config.holdout_fraction * (size - static_cast<double>(plan.holdout))));
  return plan;
}

// Builds a two-column table (feature, origin label) from the selected rows
// of both sides.
Table SideTable(const Column& train_column, std::span<const std::size_t> train_rows,
                const Column& test_column, std::span<const std::size_t> test_rows,
                bool test_is_positive) {
  const Column train_part = train_column.Gather(train_rows).Renamed(kFeatureName);
  const Column test_part = test_column.Gather(test_rows).Renamed(kFeatureName);
  Table a = Table::FromColumns({train_part});
  Table b = Table::FromColumns({test_part});
  Table merged = Table::Concat({a, b});
  std::vector<std::uint8_t> origin(train_rows.size() + test_rows.size());
  const std::uint8_t test_label = test_is_positive ? 1 : 0;
  std::fill(origin.begin(), origin.begin() + train_rows.size(), 1 - test_label);
  std::fill(origin.begin() + train_rows.size(), origin.end(), test_label);
  return merged.WithColumn(Column::Binary(kOriginName, std::move(origin), ColumnRole::kLabelInstall));
}

}  // namespace

GbdtParams DefaultAdversarialParams() {
  GbdtParams params;
  params.num_leaves = 31;
  params.num_iterations = 100;
  params.early_stopping_rounds = 20;
  params.learning_rate = 0.1;
  return params;
}

void AdvConfig::Validate() const {
  if (!(auc_threshold >= 0.5 && auc_threshold <= 1.0)) {
    throw Error("adversarial config: auc_threshold must be in [0.5, 1]");
  }
  if (!(holdout_fraction > 0 && holdout_fraction < 1)) {
    throw Error("adversarial config: holdout_fraction must be in (0, 1)");
  }
  if (subsample_per_side && *subsample_per_side < 2) {
    throw Error("adversarial config: subsample_per_side must be >= 2");
  }
  classifier_params.Validate();
}

nlohmann::json AdvConfig::ToJson() const {
  return {{"auc_threshold", auc_threshold},
          {"classifier_params", classifier_params.ToJson()},
          {"holdout_fraction", holdout_fraction},
          {"seed", seed},
          {"subsample_per_side", subsample_per_side ? nlohmann::json(*subsample_per_side)
                                                    : nlohmann::json(nullptr)},
          {"test_is_positive", test_is_positive}};
}

void AdvConfig::Override(const nlohmann::json& json) {
  try {
    for (const auto& [key, value] : json.items()) {
      if (key == "auc_threshold") auc_threshold = value.get<double>();
      else if (key == "classifier_params") classifier_params.Override(value);
      else if (key == "holdout_fraction") holdout_fraction = value.get<double>();
      else if (key == "seed") seed = value.get<std::uint64_t>();
      else if (key == "subsample_per_side") {
        subsample_per_side = value.is_null() ? std::nullopt
                                             : std::optional<std::size_t>(value.get<std::size_t>());
      } else if (key == "test_is_positive") test_is_positive = value.get<bool>();
      else if (key == "num_threads") num_threads = value.get<int>();
      else if (key == "enabled" || key == "reaudit_encoded") continue;
      else throw Error("adversarial config: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("adversarial config: ") + e.what());
  }
}

std::string_view VerdictName(Verdict verdict) {
  switch (verdict) {
    case Verdict::kKeep:
      return "keep";
    case Verdict::kDrop:
      return "drop";
    case Verdict::kSkipped:
      return "skipped";
  }
  return "unknown";
}

std::set<std::string> AdvReport::Dropped() const {
  std::set<std::string> out;
  for (const auto& f : features) {
    if (f.verdict == Verdict::kDrop) out.insert(f.name);
  }
  return out;
}

const FeatureAudit* AdvReport::Find(std::string_view name) const {
  for (const auto& f : features) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

nlohmann::json AdvReport::ToJson() const {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& f : features) {
    nlohmann::json entry = {{"feature", f.name}, {"verdict", VerdictName(f.verdict)}};
    entry["auc"] = f.verdict == Verdict::kSkipped ? nlohmann::json(nullptr) : nlohmann::json(f.auc);
    if (!f.reason.empty()) entry["reason"] = f.reason;
    entries.push_back(std::move(entry));
  }
  return {{"features", entries},
          {"n_train_rows", n_train_rows},
          {"n_test_rows", n_test_rows},
          {"config", config.ToJson()}};
}

std::string AdvReport::ToCsv() const {
  std::ostringstream out;
  out << "feature,auc,verdict\n";
  for (const auto& f : features) {
    out << f.name << ',' << (f.verdict == Verdict::kSkipped ? "" : FormatDouble(f.auc)) << ','
        << VerdictName(f.verdict) << '\n';
  }
  return out.str();
}

double AdversarialAuc(const Column& train_column, const Column& test_column,
                      const AdvConfig& config) {
  config.Validate();
  if (train_column.size() == 0 || test_column.size() == 0) {
    throw Error("adversarial AUC needs rows on both sides");
  }
  if (train_column.role() != test_column.role()) {
    throw Error("adversarial AUC: column '" + train_column.name() + "' has different types");
  }
  const SidePlan train_plan = PlanSide(train_column.size(), config, kTrainSide);
  const SidePlan test_plan = PlanSide(test_column.size(), config, kTestSide);
  if (train_plan.holdout == 0 || test_plan.holdout == 0) {
    throw Error("adversarial holdout for '" + train_column.name() +
                "' would be single-class; provide more rows per side");
  }
  if (train_plan.stop == 0 || test_plan.stop == 0 ||
      train_plan.rows.size() == train_plan.holdout + train_plan.stop ||
      test_plan.rows.size() == test_plan.holdout + test_plan.stop) {
    throw Error("adversarial split for '" + train_column.name() +
                "' leaves a side without training rows; provide more rows per side");
  }

  auto slice = [](const SidePlan& plan, std::size_t begin, std::size_t end) {
    std::vector<std::size_t> rows(plan.rows.begin() + begin, plan.rows.begin() + end);
    std::sort(rows.begin(), rows.end());
    return rows;
  };
  const auto& tp = train_plan;
  const auto& sp = test_plan;
  const Table holdout = SideTable(train_column, slice(tp, 0, tp.holdout), test_column,
                                  slice(sp, 0, sp.holdout), config.test_is_positive);
  const Table stop = SideTable(train_column, slice(tp, tp.holdout, tp.holdout + tp.stop),
                               test_column, slice(sp, sp.holdout, sp.holdout + sp.stop),
                               config.test_is_positive);
  const Table fit = SideTable(train_column, slice(tp, tp.holdout + tp.stop, tp.rows.size()),
                              test_column, slice(sp, sp.holdout + sp.stop, sp.rows.size()),
                              config.test_is_positive);

  GbdtParams params = config.classifier_params;
  params.seed = DeriveSeed(config.seed, 13);
  params.num_threads = 1;
  const GbdtModel model = Fit(params, fit, stop, {kFeatureName}, kOriginName);
  const auto scores = model.PredictRaw(holdout);
  return Auc(EvalBatch(holdout.column(kOriginName).flags(), scores));
}

AdvReport Audit(const Table& train, const Table& test, const AdvConfig& config) {
  std::vector<std::string> features;
  for (const auto& spec : train.schema().columns()) {
    if (IsFeatureRole(spec.role)) features.push_back(spec.name);
  }
  return Audit(train, test, config, features);
}

AdvReport Audit(const Table& train, const Table& test, const AdvConfig& config,
                const std::vector<std::string>& features) {
  config.Validate();
  if (train.n_rows() == 0) throw Error("adversarial audit: train table is empty");
  if (test.n_rows() == 0) throw Error("adversarial audit: test table is empty");
  for (const auto& name : features) {
    const Column* a = train.FindColumn(name);
    const Column* b = test.FindColumn(name);
    if (a == nullptr || b == nullptr) {
      throw Error("adversarial audit: feature '" + name + "' is missing from one side");
    }
    if (!IsFeatureRole(a->role())) {
      throw Error("adversarial audit: column '" + name + "' is not a feature");
    }
  }

  AdvReport report;
  report.config = config;
  report.n_train_rows = train.n_rows();
  report.n_test_rows = test.n_rows();
  report.features.resize(features.size());
  const auto n = static_cast<std::int64_t>(features.size());
#pragma omp parallel for schedule(dynamic) num_threads(internal::ResolveThreads(config.num_threads))
  for (std::int64_t i = 0; i < n; ++i) {
    FeatureAudit& audit = report.features[i];
    audit.name = features[i];
    try {
      audit.auc = AdversarialAuc(train.column(audit.name), test.column(audit.name), config);
      audit.verdict = audit.auc >= config.auc_threshold ? Verdict::kDrop : Verdict::kKeep;
    } catch (const Error& e) {
      audit.verdict = Verdict::kSkipped;
      audit.reason = e.what();
    }
  }
  return report;
}

Table FilterFeatures(const AdvReport& report, const Table& table) {
  return table.WithoutColumns(report.Dropped());
}

}  // namespace rlt
