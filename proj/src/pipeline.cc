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

#include "rlt/pipeline.h"

#include <chrono>
#include <filesystem>
#include <functional>

#include "rlt/metrics.h"
#include "rlt/report.h"

namespace rlt {
namespace {

namespace fs = std::filesystem;

std::string ResolveLabel(const Table& table, const std::string& label) {
  const Column* column = nullptr;
  if (label == "install") column = table.FindByRole(ColumnRole::kLabelInstall);
  else if (label == "click") column = table.FindByRole(ColumnRole::kLabelClick);
  else column = table.FindColumn(label);
  if (column == nullptr || !IsLabelRole(column->role())) {
    throw Error("label '" + label + "' does not name a label column");
  }
  return column->name();
}

// Thread counts do not affect results, so they stay out of the report.
nlohmann::json ConfigEcho(const PipelineConfig& config) {
  nlohmann::json echo = config.ToJson();
  echo["run"].erase("threads");
  echo["adversarial"].erase("num_threads");
  echo["adversarial"]["classifier_params"].erase("num_threads");
  echo["gbdt"].erase("num_threads");
  return echo;
}

void CheckColumnReferences(const PipelineConfig& config, const Table& table) {
  ResolveLabel(table, config.label);
  for (const auto& name : config.denoise.features) {
    const Column* column = table.FindColumn(name);
    if (column == nullptr || column->role() != ColumnRole::kContinuous) {
      throw Error("denoise feature '" + name + "' is not a continuous column");
    }
  }
  for (const auto& spec : config.encoder_specs) {
    const Column* column = table.FindColumn(spec.feature);
    if (column == nullptr || column->role() != ColumnRole::kCategorical) {
      throw Error("encoder feature '" + spec.feature + "' is not a categorical column");
    }
  }
}

std::optional<SplitMetrics> Evaluate(const Table& table, const std::string& label,
                                     const std::vector<double>& predictions) {
  if (table.n_rows() == 0) return std::nullopt;
  const EvalBatch batch(table.column(label).flags(), predictions);
  if (batch.positives() == 0 || batch.positives() == batch.size()) return std::nullopt;
  SplitMetrics metrics;
  metrics.logloss = LogLoss(batch);
  metrics.auc = Auc(batch);
  metrics.nce = Nce(batch).nce;
  return metrics;
}

class StageRunner {
 public:
  explicit StageRunner(nlohmann::json& timings) : timings_(timings) {}

  void operator()(const std::string& name, const std::function<void()>& body) {
    const auto start = std::chrono::steady_clock::now();
    try {
      body();
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
    timings_[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

 private:
  nlohmann::json& timings_;
};

}  // namespace

nlohmann::json SplitMetrics::ToJson() const {
  return {{"logloss", logloss}, {"auc", auc}, {"nce", nce}};
}

Table LoadInput(const PipelineConfig& config) {
  if (!config.cache_path.empty() && fs::exists(config.cache_path)) return LoadBinary(config.cache_path);
  std::vector<std::string> paths = config.train_paths;
  paths.insert(paths.end(), config.test_paths.begin(), config.test_paths.end());
  if (paths.empty()) throw Error("no input files configured (paths.train / paths.test)");
  if (!config.schema) throw Error("a schema is required to read CSV input");
  Table table = IngestCsv(paths, *config.schema);
  if (!config.cache_path.empty()) SaveBinary(table, config.cache_path);
  return table;
}

RunResult RunPipeline(const PipelineConfig& config, bool write_artifacts) {
  nlohmann::json timings = nlohmann::json::object();
  Table table;
  StageRunner stage(timings);
  stage("ingest", [&] { table = LoadInput(config); });
  RunResult result = RunPipelineOn(config, table, write_artifacts);
  result.timings["ingest"] = timings["ingest"];
  if (write_artifacts) {
    WriteFile((fs::path(config.output_dir) / "timings.json").string(), result.timings.dump(2) + "\n");
  }
  return result;
}

RunResult RunPipelineOn(const PipelineConfig& config, const Table& input, bool write_artifacts) {
  RunResult result;
  result.timings = nlohmann::json::object();
  StageRunner stage(result.timings);
  const fs::path out_dir(config.output_dir);
  const auto write = [&](const std::string& name, std::string_view contents) {
    if (write_artifacts) WriteFile((out_dir / name).string(), contents);
  };

  nlohmann::json& report = result.report;
  report["toolkit_version"] = kToolkitVersion;
  report["config"] = ConfigEcho(config);

  Table table = input;
  SplitPlan plan;
  std::string label;
  stage("config", [&] {
    config.Validate();
    CheckColumnReferences(config, table);
    label = ResolveLabel(table, config.label);
    plan = config.split.Resolve(table);
    if (write_artifacts) fs::create_directories(out_dir);
  });

  if (table.n_rows() == 0) throw StageError("ingest", "input table is empty");
  const auto [first_day, last_day] = table.DayRange();
  report["ingest"] = {{"n_rows", table.n_rows()},
                      {"n_cols", table.n_cols()},
                      {"first_day", first_day},
                      {"last_day", last_day}};

  SplitResult parts;
  stage("split", [&] {
    parts = Split(table, plan);
    report["split"] = {{"train_days", plan.train_days},
                       {"valid_day", plan.valid_day},
                       {"test_day", plan.test_day ? nlohmann::json(*plan.test_day) : nlohmann::json(nullptr)},
                       {"n_train", parts.train.n_rows()},
                       {"n_valid", parts.valid.n_rows()},
                       {"n_test", parts.test.n_rows()}};
    if (parts.train.n_rows() == 0) throw Error("no training rows");
  });

  if (config.stages.adversarial) {
    stage("adversarial", [&] {
      const bool against_test = parts.test.n_rows() > 0;
      AdvReport audit = Audit(parts.train, against_test ? parts.test : parts.valid, config.adversarial);
      result.dropped = audit.Dropped();
      table = FilterFeatures(audit, table);
      nlohmann::json features = nlohmann::json::array();
      for (const auto& f : audit.features) {
        features.push_back({{"feature", f.name}, {"auc", f.auc}, {"verdict", VerdictName(f.verdict)}});
      }
      report["adversarial"] = {{"compared_against", against_test ? "test" : "valid"},
                               {"threshold", config.adversarial.auc_threshold},
                               {"features", features},
                               {"dropped", result.dropped},
                               {"artifacts", {"adversarial.json", "adversarial.csv", "adversarial.svg"}}};
      result.adversarial = std::move(audit);
      if (write_artifacts) {
        ReportBundle bundle;
        bundle.adversarial = result.adversarial;
        for (const char* format : {"csv", "svg"}) ExportReport(bundle, format, out_dir.string());
        write("adversarial.json", result.adversarial->ToJson().dump(2) + "\n");
      }
    });
  }

  if (config.stages.denoise) {
    stage("denoise", [&] {
      std::vector<std::string> continuous;
      for (const auto& spec : table.schema().columns()) {
        if (spec.role == ColumnRole::kContinuous) continuous.push_back(spec.name);
      }
      DenoiseOptions options = config.denoise;
      const bool explicit_list = !options.features.empty();
      std::erase_if(options.features, [&](const std::string& f) { return result.dropped.contains(f); });
      DenoiseResult denoised;
      // An explicit list whose features were all filtered leaves nothing to do.
      if (!explicit_list || !options.features.empty()) {
        denoised = DenoiseTable(table, options);
        table = denoised.table;
      }
      nlohmann::json section = denoised.ToJson();
      if (continuous.size() >= 2) {
        const SplitResult raw = Split(input, plan);
        const CorrelationMatrix correlation = ComputeCorrelation(raw.train, continuous);
        section["correlation_warnings"] = correlation.warnings;
        section["artifacts"] = {"deltas.json", "correlation.csv"};
        write("correlation.csv", correlation.ToCsv());
      } else {
        section["artifacts"] = {"deltas.json"};
      }
      report["denoise"] = section;
      write("deltas.json", denoised.ToJson().dump(2) + "\n");
    });
  }

  if (config.stages.frequency || config.stages.target) {
    stage("encode", [&] {
      std::vector<EncoderSpec> specs;
      if (config.encoder_specs.empty()) {
        specs = DefaultEncoderSpecs(table, config.stages.frequency, config.stages.target, config.window,
                                    config.target_smoothing);
      } else {
        for (const auto& spec : config.encoder_specs) {
          const bool enabled =
              spec.kind == EncoderKind::kFrequency ? config.stages.frequency : config.stages.target;
          if (enabled && !result.dropped.contains(spec.feature)) specs.push_back(spec);
        }
      }
      EncodeResult encoded = FitAndEncode(table, {specs, config.drop_original, config.threads});
      table = encoded.table;
      report["encoders"] = {{"encoders", encoded.Summary()}, {"artifacts", {"encoders.json"}}};
      write("encoders.json", encoded.ToJson().dump() + "\n");

      if (config.reaudit_encoded && config.stages.adversarial) {
        const SplitResult now = Split(table, plan);
        std::vector<std::string> names;
        for (const auto& state : encoded.states) names.push_back(state.OutputName());
        const AdvReport reaudit =
            Audit(now.train, now.test.n_rows() > 0 ? now.test : now.valid, config.adversarial, names);
        nlohmann::json features = nlohmann::json::array();
        for (const auto& f : reaudit.features) {
          features.push_back({{"feature", f.name}, {"auc", f.auc}, {"verdict", VerdictName(f.verdict)}});
        }
        report["encoders"]["reaudit"] = features;
      }
    });
  }

  if (config.stages.train) {
    stage("train", [&] {
      parts = Split(table, plan);
      result.model = Fit(config.gbdt, parts.train, parts.valid, table.FeatureNames(), label);
      const GbdtModel& model = *result.model;
      nlohmann::json curve = nlohmann::json::array();
      for (const auto& record : model.curve()) curve.push_back(record.valid_logloss);
      report["training"] = {{"label", label},
                            {"n_features", model.FeatureNames().size()},
                            {"best_iteration", model.best_iteration()},
                            {"iterations_evaluated", model.curve().size()},
                            {"valid_logloss_curve", curve},
                            {"artifacts", {"model.json", "training_curve.csv", "importance.csv",
                                           "importance.svg"}}};
      nlohmann::json importance = nlohmann::json::array();
      for (const auto& [name, count] : model.FeatureImportance()) {
        importance.push_back({{"feature", name}, {"split_count", count}});
      }
      report["importance"] = importance;
      if (write_artifacts) {
        model.Save((out_dir / "model.json").string());
        ReportBundle bundle;
        bundle.model = &model;
        for (const char* format : {"csv", "svg"}) ExportReport(bundle, format, out_dir.string());
      }
    });
    stage("evaluate", [&] {
      const GbdtModel& model = *result.model;
      result.valid_predictions = model.Predict(parts.valid);
      result.valid = Evaluate(parts.valid, label, result.valid_predictions);
      nlohmann::json metrics = nlohmann::json::object();
      if (result.valid) metrics["valid"] = result.valid->ToJson();
      write("valid_predictions.csv", PredictionsCsv(parts.valid, result.valid_predictions));
      if (parts.test.n_rows() > 0) {
        result.test_predictions = model.Predict(parts.test);
        result.test = Evaluate(parts.test, label, result.test_predictions);
        if (result.test) metrics["test"] = result.test->ToJson();
        write("test_predictions.csv", PredictionsCsv(parts.test, result.test_predictions));
      }
      report["metrics"] = metrics;
    });
  }

  write("report.json", report.dump(2) + "\n");
  return result;
}

std::vector<AblationRow> Ablate(const PipelineConfig& config, const std::vector<std::string>& variants,
                                bool write_artifacts) {
  if (variants.empty()) throw Error("ablation needs at least one variant");
  Table table;
  try {
    table = LoadInput(config);
  } catch (const std::exception& e) {
    throw StageError("ingest", e.what());
  }
  PipelineConfig current = config;
  current.stages = {false, false, false, false, true};
  std::vector<AblationRow> rows;
  for (const auto& variant : variants) {
    if (variant == "adversarial") current.stages.adversarial = true;
    else if (variant == "denoise") current.stages.denoise = true;
    else if (variant == "frequency") current.stages.frequency = true;
    else if (variant == "target") current.stages.target = true;
    else if (variant != "vanilla") throw Error("unknown ablation variant '" + variant + "'");
    const RunResult run = RunPipelineOn(current, table, false);
    if (!run.valid) throw StageError("evaluate", "validation metrics are undefined for variant " + variant);
    rows.push_back({variant, *run.valid, run.test});
  }
  if (write_artifacts) {
    fs::create_directories(config.output_dir);
    WriteFile((fs::path(config.output_dir) / "ablation.csv").string(), AblationCsv(rows));
  }
  return rows;
}

std::string AblationCsv(const std::vector<AblationRow>& rows) {
  std::string out = "variant,valid_logloss,valid_auc,valid_nce,test_logloss,test_auc,test_nce\n";
  for (const auto& row : rows) {
    out += row.variant + "," + FormatDouble(row.valid.logloss) + "," + FormatDouble(row.valid.auc) + "," +
           FormatDouble(row.valid.nce);
    if (row.test) {
      out += "," + FormatDouble(row.test->logloss) + "," + FormatDouble(row.test->auc) + "," +
             FormatDouble(row.test->nce);
    } else {
      out += ",,,";
    }
    out += "\n";
  }
  return out;
}

}  // namespace rlt
