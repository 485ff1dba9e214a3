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

#include "rlt/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "rlt/common.h"

namespace rlt {
namespace {

std::string EscapeXml(const std::string& text) {
  std::string out;
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string Fixed(double value, int digits) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", digits, value);
  return buffer;
}

}  // namespace

std::string BarChartSvg(const std::string& title,
                        const std::vector<std::pair<std::string, double>>& bars,
                        std::optional<double> reference) {
  constexpr int kLabelWidth = 220, kPlotWidth = 480, kBarHeight = 18, kGap = 4, kTop = 40;
  const int height = kTop + static_cast<int>(bars.size()) * (kBarHeight + kGap) + 20;
  const int width = kLabelWidth + kPlotWidth + 80;
  double max_value = reference.value_or(0.0);
  for (const auto& bar : bars) max_value = std::max(max_value, bar.second);
  if (!(max_value > 0)) max_value = 1.0;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << EscapeXml(title) << "</text>\n";
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const int y = kTop + static_cast<int>(i) * (kBarHeight + kGap);
    const double w = std::max(0.0, bars[i].second) / max_value * kPlotWidth;
    svg << "<g class=\"bar\"><text x=\"" << kLabelWidth - 6 << "\" y=\"" << y + kBarHeight - 5
        << "\" text-anchor=\"end\">" << EscapeXml(bars[i].first) << "</text>";
    svg << "<rect x=\"" << kLabelWidth << "\" y=\"" << y << "\" width=\"" << Fixed(w, 2)
        << "\" height=\"" << kBarHeight << "\" fill=\"#4878a8\"/>";
    svg << "<text x=\"" << Fixed(kLabelWidth + w + 4, 2) << "\" y=\"" << y + kBarHeight - 5 << "\">"
        << FormatDouble(bars[i].second) << "</text></g>\n";
  }
  if (reference) {
    const double x = kLabelWidth + *reference / max_value * kPlotWidth;
    svg << "<line x1=\"" << Fixed(x, 2) << "\" y1=\"" << kTop - 4 << "\" x2=\"" << Fixed(x, 2)
        << "\" y2=\"" << height - 16 << "\" stroke=\"#c03030\" stroke-dasharray=\"4,3\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string ImportanceCsv(const GbdtModel& model) {
  std::string out = "feature,split_count\n";
  for (const auto& [name, count] : model.FeatureImportance()) {
    out += name + "," + std::to_string(count) + "\n";
  }
  return out;
}

std::string ImportanceSvg(const GbdtModel& model, std::size_t top) {
  std::vector<std::pair<std::string, double>> bars;
  for (const auto& [name, count] : model.FeatureImportance()) {
    if (bars.size() == top) break;
    bars.emplace_back(name, static_cast<double>(count));
  }
  return BarChartSvg("Feature importance (split count)", bars);
}

std::string TrainingCurveCsv(const GbdtModel& model) {
  std::string out = "iteration,train_logloss,valid_logloss\n";
  for (const auto& record : model.curve()) {
    out += std::to_string(record.iteration) + "," + FormatDouble(record.train_logloss) + "," +
           FormatDouble(record.valid_logloss) + "\n";
  }
  return out;
}

std::string AdversarialSvg(const AdvReport& report) {
  std::vector<std::pair<std::string, double>> bars;
  for (const auto& feature : report.features) bars.emplace_back(feature.name, feature.auc);
  return BarChartSvg("Adversarial validation AUC", bars, report.config.auc_threshold);
}

std::string PredictionsCsv(const Table& table, const std::vector<double>& probabilities) {
  const Column* ids = table.FindByRole(ColumnRole::kRowId);
  if (probabilities.size() != table.n_rows()) throw Error("prediction count does not match rows");
  std::string out;
  out.reserve(table.n_rows() * 20);
  char buffer[64];
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    const long long id = ids != nullptr ? ids->ids()[r] : static_cast<long long>(r);
    std::snprintf(buffer, sizeof(buffer), "%lld,%.6f\n", id, probabilities[r]);
    out += buffer;
  }
  return out;
}

std::vector<std::string> SupportedReportFormats() { return {"csv", "json", "svg"}; }

std::vector<std::string> ExportReport(const ReportBundle& bundle, const std::string& format,
                                      const std::string& dir) {
  const auto supported = SupportedReportFormats();
  if (std::find(supported.begin(), supported.end(), format) == supported.end()) {
    throw Error("unknown report format '" + format + "' (supported: csv, json, svg)");
  }
  std::filesystem::create_directories(dir);
  std::vector<std::pair<std::string, std::string>> files;
  if (format == "json") {
    files.emplace_back("report.json", bundle.report.dump(2) + "\n");
    if (bundle.adversarial) files.emplace_back("adversarial.json", bundle.adversarial->ToJson().dump(2) + "\n");
  } else if (format == "csv") {
    if (bundle.adversarial) files.emplace_back("adversarial.csv", bundle.adversarial->ToCsv());
    if (bundle.correlation) files.emplace_back("correlation.csv", bundle.correlation->ToCsv());
    if (bundle.model != nullptr) {
      files.emplace_back("importance.csv", ImportanceCsv(*bundle.model));
      files.emplace_back("training_curve.csv", TrainingCurveCsv(*bundle.model));
    }
  } else {
    if (bundle.adversarial) files.emplace_back("adversarial.svg", AdversarialSvg(*bundle.adversarial));
    if (bundle.model != nullptr) files.emplace_back("importance.svg", ImportanceSvg(*bundle.model));
  }
  std::vector<std::string> names;
  for (const auto& [name, contents] : files) {
    WriteFile((std::filesystem::path(dir) / name).string(), contents);
    names.push_back(name);
  }
  return names;
}

}  // namespace rlt
