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

// Report exports: CSV tables and self-contained SVG bar charts.

#ifndef RLT_REPORT_H_
#define RLT_REPORT_H_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rlt/advval.h"
#include "rlt/denoise.h"
#include "rlt/gbdt.h"

namespace rlt {

inline constexpr std::size_t kImportanceChartBars = 20;

// Horizontal bars in the given order. `reference` draws a dashed vertical
// line at that value (e.g. a drop threshold).
std::string BarChartSvg(const std::string& title,
                        const std::vector<std::pair<std::string, double>>& bars,
                        std::optional<double> reference = std::nullopt);

std::string ImportanceCsv(const GbdtModel& model);  // feature,split_count
std::string ImportanceSvg(const GbdtModel& model, std::size_t top = kImportanceChartBars);
std::string TrainingCurveCsv(const GbdtModel& model);  // iteration,train_logloss,valid_logloss
std::string AdversarialSvg(const AdvReport& report);

// Headerless "row_id,probability" lines, probability with 6 decimals.
std::string PredictionsCsv(const Table& table, const std::vector<double>& probabilities);

// Everything a finished run can export. Absent parts are skipped.
struct ReportBundle {
  nlohmann::json report;
  std::optional<AdvReport> adversarial;
  std::optional<CorrelationMatrix> correlation;
  const GbdtModel* model = nullptr;
};

std::vector<std::string> SupportedReportFormats();  // csv, json, svg

// Writes the bundle's files for one format into `dir` and returns their
// names. Throws on an unknown format, listing the supported ones.
std::vector<std::string> ExportReport(const ReportBundle& bundle, const std::string& format,
                                      const std::string& dir);

}  // namespace rlt

#endif  // RLT_REPORT_H_
