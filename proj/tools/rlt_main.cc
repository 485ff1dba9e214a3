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

// Command-line front end. Every subcommand reads and writes files, so any
// stage can be rerun on persisted artifacts.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "rlt/advval.h"
#include "rlt/common.h"
#include "rlt/denoise.h"
#include "rlt/encoders.h"
#include "rlt/gbdt.h"
#include "rlt/metrics.h"
#include "rlt/pipeline.h"
#include "rlt/report.h"
#include "rlt/synthgen.h"
#include "rlt/table.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool IsBinaryTable(const std::string& path) {
  if (path.ends_with(".rlt")) return true;
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (f == nullptr) return false;
  char magic[4] = {};
  const bool ok = std::fread(magic, 1, 4, f) == 4 && std::string_view(magic, 4) == "RLT1";
  std::fclose(f);
  return ok;
}

// A table argument is a binary cache or delimited text described by a schema.
rlt::Table ReadTable(const std::vector<std::string>& paths, const std::string& schema_path) {
  if (paths.size() == 1 && IsBinaryTable(paths[0])) return rlt::LoadBinary(paths[0]);
  if (schema_path.empty()) throw rlt::Error("--schema is required to read delimited text input");
  return rlt::IngestCsv(paths, rlt::Schema::Load(schema_path));
}

void WriteTable(const rlt::Table& table, const std::string& path) {
  if (path.ends_with(".rlt")) {
    rlt::SaveBinary(table, path);
  } else {
    rlt::WriteCsv(table, path);
  }
}

void WriteJson(const std::string& path, const json& value) { rlt::WriteFile(path, value.dump(2) + "\n"); }

// "45-65" or "45,46,50".
std::set<std::int32_t> ParseDays(const std::string& text) {
  std::set<std::int32_t> days;
  std::stringstream stream(text);
  std::string part;
  while (std::getline(stream, part, ',')) {
    const auto dash = part.find('-', 1);
    try {
      if (dash == std::string::npos) {
        days.insert(std::stoi(part));
      } else {
        const int lo = std::stoi(part.substr(0, dash)), hi = std::stoi(part.substr(dash + 1));
        for (int d = lo; d <= hi; ++d) days.insert(d);
      }
    } catch (const std::exception&) {
      throw rlt::Error("bad day list '" + text + "'");
    }
  }
  return days;
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

struct SplitArgs {
  std::string train_days;
  int valid_day = 66;
  int test_day = -1;

  void Add(CLI::App* app) {
    app->add_option("--train-days", train_days, "Training days, e.g. 45-65 (default: all before the validation day)");
    app->add_option("--valid-day", valid_day, "Validation day")->capture_default_str();
    app->add_option("--test-day", test_day, "Test day (-1: none)")->capture_default_str();
  }
  rlt::SplitPlan Plan(const rlt::Table& table) const {
    rlt::SplitConfig config;
    if (!train_days.empty()) config.train_days = ParseDays(train_days);
    config.valid_day = valid_day;
    config.test_day = test_day >= 0 ? std::optional<std::int32_t>(test_day) : std::nullopt;
    return config.Resolve(table);
  }
};

void PrintMetrics(const std::string& name, const rlt::EvalBatch& batch) {
  const auto nce = rlt::Nce(batch);
  json out = {{"split", name},
              {"rows", batch.size()},
              {"logloss", rlt::LogLoss(batch)},
              {"auc", rlt::Auc(batch)},
              {"nce", nce.nce},
              {"background_rate", nce.background_rate}};
  std::cout << out.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabular user-response prediction toolkit"};
  app.set_version_flag("--version", std::string(rlt::kToolkitVersion));
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with planted structure");
  std::string synth_spec, synth_out = "synth";
  std::optional<std::uint64_t> synth_seed;
  std::optional<std::size_t> synth_rows;
  bool synth_single = false;
  synth->add_option("--spec", synth_spec, "Generator spec JSON (defaults for absent keys)");
  synth->add_option("--seed", synth_seed, "Override the generator seed");
  synth->add_option("--rows-per-day", synth_rows, "Override rows per day");
  synth->add_option("--out-dir", synth_out, "Output directory")->capture_default_str();
  synth->add_flag("--single-file", synth_single, "Write one data.csv instead of train.csv/test.csv");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Parse delimited files into a binary table");
  std::vector<std::string> ingest_inputs;
  std::string ingest_schema, ingest_out, ingest_split_dir;
  SplitArgs ingest_split;
  ingest->add_option("inputs", ingest_inputs, "Input files, concatenated in order")->required();
  ingest->add_option("--schema", ingest_schema, "Schema JSON")->required();
  ingest->add_option("--out", ingest_out, "Output table (.rlt binary, else delimited)")->required();
  ingest->add_option("--split-dir", ingest_split_dir, "Also write train/valid/test tables here");
  ingest_split.Add(ingest);

  // adversarial
  auto* adversarial = app.add_subcommand("adversarial", "Per-feature adversarial validation");
  std::vector<std::string> adv_table;
  std::string adv_schema, adv_test, adv_out = "adversarial", adv_filtered, adv_config;
  std::optional<int> adv_test_day;
  std::optional<double> adv_threshold;
  std::optional<std::uint64_t> adv_seed;
  int adv_threads = 0;
  adversarial->add_option("--table", adv_table, "Table holding train rows (and the test day if --test-day)")->required();
  adversarial->add_option("--schema", adv_schema, "Schema for delimited input");
  adversarial->add_option("--test-table", adv_test, "Separate test table");
  adversarial->add_option("--test-day", adv_test_day, "Compare days before this day against it");
  adversarial->add_option("--threshold", adv_threshold, "Drop threshold on AUC");
  adversarial->add_option("--seed", adv_seed, "Sampling seed");
  adversarial->add_option("--config", adv_config, "JSON with adversarial settings");
  adversarial->add_option("--threads", adv_threads, "Worker threads (0: all)");
  adversarial->add_option("--out-dir", adv_out, "Report directory")->capture_default_str();
  adversarial->add_option("--filtered-out", adv_filtered, "Write the table without dropped features");

  // denoise
  auto* denoise = app.add_subcommand("denoise", "Detect lattice steps and quantize continuous features");
  std::vector<std::string> dn_table;
  std::string dn_schema, dn_out, dn_report = "deltas.json", dn_origin = "zero", dn_features;
  double dn_tol = rlt::kDefaultLatticeTolerance;
  bool dn_categorical = false;
  denoise->add_option("--table", dn_table, "Input table")->required();
  denoise->add_option("--schema", dn_schema, "Schema for delimited input");
  denoise->add_option("--out", dn_out, "Output table");
  denoise->add_option("--report", dn_report, "Delta estimates JSON")->capture_default_str();
  denoise->add_option("--origin", dn_origin, "zero | vmin")->capture_default_str();
  denoise->add_option("--tol", dn_tol, "Relative residual tolerance")->capture_default_str();
  denoise->add_option("--features", dn_features, "Comma-separated features (default: all continuous)");
  denoise->add_flag("--as-categorical", dn_categorical, "Emit quantized values as categorical tokens");

  // correlate
  auto* correlate = app.add_subcommand("correlate", "Pairwise Pearson correlation of numeric features");
  std::vector<std::string> cr_table;
  std::string cr_schema, cr_out = "correlation.csv", cr_features;
  correlate->add_option("--table", cr_table, "Input table")->required();
  correlate->add_option("--schema", cr_schema, "Schema for delimited input");
  correlate->add_option("--features", cr_features, "Comma-separated features (default: all continuous)");
  correlate->add_option("--out", cr_out, "Output CSV")->capture_default_str();

  // encode
  auto* encode = app.add_subcommand("encode", "Frequency and target encoding of categorical features");
  std::vector<std::string> en_table;
  std::string en_schema, en_out, en_state = "encoders.json", en_specs, en_apply, en_window = "prev_week";
  double en_a = rlt::kDefaultTargetSmoothing;
  bool en_no_freq = false, en_no_target = false, en_drop = false;
  encode->add_option("--table", en_table, "Input table")->required();
  encode->add_option("--schema", en_schema, "Schema for delimited input");
  encode->add_option("--out", en_out, "Augmented output table")->required();
  encode->add_option("--state", en_state, "Encoder state JSON to write")->capture_default_str();
  encode->add_option("--specs", en_specs, "JSON list of {feature, kind, window|target, a}");
  encode->add_option("--apply", en_apply, "Re-apply a saved encoder state instead of fitting");
  encode->add_option("--window", en_window, "prev_day | prev_week | all_history")->capture_default_str();
  encode->add_option("-a,--smoothing", en_a, "Target encoding smoothing")->capture_default_str();
  encode->add_flag("--no-frequency", en_no_freq, "Skip frequency encoders");
  encode->add_flag("--no-target", en_no_target, "Skip target encoders");
  encode->add_flag("--drop-original", en_drop, "Drop the encoded categorical columns");

  // train
  auto* train = app.add_subcommand("train", "Fit the gradient-boosted trees with early stopping");
  std::vector<std::string> tr_table;
  std::string tr_schema, tr_params, tr_out = "model.json", tr_label = "install", tr_curve;
  SplitArgs tr_split;
  int tr_threads = 0;
  train->add_option("--table", tr_table, "Input table")->required();
  train->add_option("--schema", tr_schema, "Schema for delimited input");
  train->add_option("--params", tr_params, "GBDT parameter JSON");
  train->add_option("--label", tr_label, "install | click | label column")->capture_default_str();
  train->add_option("--out", tr_out, "Model JSON")->capture_default_str();
  train->add_option("--curve", tr_curve, "Training curve CSV");
  train->add_option("--threads", tr_threads, "Worker threads (0: all)");
  tr_split.Add(train);

  // predict
  auto* predict = app.add_subcommand("predict", "Score a table with a saved model");
  std::vector<std::string> pr_table;
  std::string pr_schema, pr_model, pr_out;
  predict->add_option("--table", pr_table, "Input table")->required();
  predict->add_option("--schema", pr_schema, "Schema for delimited input");
  predict->add_option("--model", pr_model, "Model JSON")->required();
  predict->add_option("--out", pr_out, "Headerless row_id,probability CSV")->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Logloss, AUC and NCE of predictions");
  std::vector<std::string> ev_table;
  std::string ev_schema, ev_predictions, ev_model, ev_label = "install";
  evaluate->add_option("--table", ev_table, "Table with labels")->required();
  evaluate->add_option("--schema", ev_schema, "Schema for delimited input");
  evaluate->add_option("--predictions", ev_predictions, "Prediction CSV (row order of the table)");
  evaluate->add_option("--model", ev_model, "Score the table with this model instead");
  evaluate->add_option("--label", ev_label, "install | click | label column")->capture_default_str();

  // ablate / run
  auto* ablate = app.add_subcommand("ablate", "Cumulative stage ablation");
  std::string ab_config, ab_variants;
  ablate->add_option("--config", ab_config, "Pipeline config JSON")->required();
  ablate->add_option("--variants", ab_variants, "Comma-separated variants (default: from config)");

  auto* run = app.add_subcommand("run", "Run the full pipeline");
  std::string run_config;
  run->add_option("--config", run_config, "Pipeline config JSON")->required();

  CLI11_PARSE(app, argc, argv);
  const CLI::App* chosen = app.get_subcommands().front();

  try {
    if (chosen == synth) {
      rlt::SynthSpec spec = synth_spec.empty() ? rlt::SynthSpec::Default()
                                               : rlt::SynthSpec::FromJson(json::parse(rlt::ReadFile(synth_spec)));
      if (synth_seed) spec.seed = *synth_seed;
      if (synth_rows) spec.n_rows_per_day = *synth_rows;
      spec.Validate();
      const rlt::SynthResult result = rlt::Generate(spec);
      fs::create_directories(synth_out);
      const fs::path dir(synth_out);
      if (synth_single) {
        rlt::WriteCsv(result.table, (dir / "data.csv").string());
      } else {
        const auto days = result.table.day_column().days();
        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t r = 0; r < days.size(); ++r) {
          (days[r] == spec.last_day ? test_rows : train_rows).push_back(r);
        }
        rlt::WriteCsv(result.table.SelectRows(train_rows), (dir / "train.csv").string());
        rlt::WriteCsv(result.table.SelectRows(test_rows), (dir / "test.csv").string());
      }
      WriteJson((dir / "schema.json").string(), result.table.schema().ToJson());
      WriteJson((dir / "truth.json").string(), result.truth.ToJson(spec));
      WriteJson((dir / "synth_spec.json").string(), spec.ToJson());
      std::cout << "wrote " << result.table.n_rows() << " rows to " << synth_out << "\n";
    } else if (chosen == ingest) {
      const rlt::Table table = rlt::IngestCsv(ingest_inputs, rlt::Schema::Load(ingest_schema));
      WriteTable(table, ingest_out);
      if (!ingest_split_dir.empty()) {
        const rlt::SplitResult parts = rlt::Split(table, ingest_split.Plan(table));
        fs::create_directories(ingest_split_dir);
        const fs::path dir(ingest_split_dir);
        rlt::SaveBinary(parts.train, (dir / "train.rlt").string());
        rlt::SaveBinary(parts.valid, (dir / "valid.rlt").string());
        if (parts.test.n_rows() > 0) rlt::SaveBinary(parts.test, (dir / "test.rlt").string());
      }
      std::cout << "ingested " << table.n_rows() << " rows, " << table.n_cols() << " columns\n";
    } else if (chosen == adversarial) {
      const rlt::Table table = ReadTable(adv_table, adv_schema);
      rlt::Table train_part, test_part;
      if (!adv_test.empty()) {
        train_part = table;
        test_part = ReadTable({adv_test}, adv_schema);
      } else if (adv_test_day) {
        std::vector<std::size_t> a, b;
        const auto days = table.day_column().days();
        for (std::size_t r = 0; r < days.size(); ++r) {
          if (days[r] < *adv_test_day) a.push_back(r);
          if (days[r] == *adv_test_day) b.push_back(r);
        }
        train_part = table.SelectRows(a);
        test_part = table.SelectRows(b);
      } else {
        throw rlt::Error("give --test-table or --test-day");
      }
      rlt::AdvConfig config;
      if (!adv_config.empty()) config.Override(json::parse(rlt::ReadFile(adv_config)));
      if (adv_threshold) config.auc_threshold = *adv_threshold;
      if (adv_seed) config.seed = *adv_seed;
      config.num_threads = adv_threads;
      config.Validate();
      const rlt::AdvReport report = rlt::Audit(train_part, test_part, config);
      rlt::ReportBundle bundle;
      bundle.adversarial = report;
      rlt::ExportReport(bundle, "csv", adv_out);
      rlt::ExportReport(bundle, "svg", adv_out);
      WriteJson((fs::path(adv_out) / "adversarial.json").string(), report.ToJson());
      if (!adv_filtered.empty()) WriteTable(rlt::FilterFeatures(report, table), adv_filtered);
      std::cout << report.ToCsv();
    } else if (chosen == denoise) {
      const rlt::Table table = ReadTable(dn_table, dn_schema);
      rlt::DenoiseOptions options;
      options.tol_rel = dn_tol;
      options.origin = rlt::ParseQuantizeOrigin(dn_origin);
      options.as_categorical = dn_categorical;
      options.features = SplitList(dn_features);
      const rlt::DenoiseResult result = rlt::DenoiseTable(table, options);
      WriteJson(dn_report, result.ToJson());
      if (!dn_out.empty()) WriteTable(result.table, dn_out);
      for (const auto& e : result.estimates) {
        std::cout << e.feature << "\t" << (e.detected ? "detected" : "none") << "\tdelta="
                  << rlt::FormatDouble(e.delta) << "\n";
      }
    } else if (chosen == correlate) {
      const rlt::Table table = ReadTable(cr_table, cr_schema);
      std::vector<std::string> features = SplitList(cr_features);
      if (features.empty()) {
        for (const auto& c : table.schema().columns()) {
          if (c.role == rlt::ColumnRole::kContinuous) features.push_back(c.name);
        }
      }
      const rlt::CorrelationMatrix matrix = rlt::ComputeCorrelation(table, features);
      rlt::WriteFile(cr_out, matrix.ToCsv());
      for (const auto& w : matrix.warnings) std::cerr << "warning: " << w << "\n";
    } else if (chosen == encode) {
      const rlt::Table table = ReadTable(en_table, en_schema);
      if (!en_apply.empty()) {
        std::vector<rlt::EncoderState> states;
        for (const auto& s : json::parse(rlt::ReadFile(en_apply)).at("encoders")) {
          states.push_back(rlt::EncoderState::FromJson(s));
        }
        WriteTable(rlt::ApplyEncoders(states, table, en_drop), en_out);
      } else {
        rlt::EncodeOptions options;
        options.drop_original = en_drop;
        if (!en_specs.empty()) {
          for (const auto& s : json::parse(rlt::ReadFile(en_specs))) {
            options.specs.push_back(rlt::EncoderSpec::FromJson(s));
          }
        } else {
          options.specs = rlt::DefaultEncoderSpecs(table, !en_no_freq, !en_no_target,
                                                   rlt::ParseWindow(en_window), en_a);
        }
        const rlt::EncodeResult result = rlt::FitAndEncode(table, options);
        rlt::WriteFile(en_state, result.ToJson().dump() + "\n");
        WriteTable(result.table, en_out);
        std::cout << result.Summary().dump(2) << "\n";
      }
    } else if (chosen == train) {
      const rlt::Table table = ReadTable(tr_table, tr_schema);
      rlt::GbdtParams params;
      if (!tr_params.empty()) params.Override(json::parse(rlt::ReadFile(tr_params)));
      params.num_threads = tr_threads;
      const rlt::SplitResult parts = rlt::Split(table, tr_split.Plan(table));
      std::string label = tr_label;
      if (label == "install" || label == "click") {
        const auto* column = table.FindByRole(label == "install" ? rlt::ColumnRole::kLabelInstall
                                                                 : rlt::ColumnRole::kLabelClick);
        if (column == nullptr) throw rlt::Error("table has no " + label + " label");
        label = column->name();
      }
      const rlt::GbdtModel model = rlt::Fit(params, parts.train, parts.valid, table.FeatureNames(), label);
      model.Save(tr_out);
      if (!tr_curve.empty()) rlt::WriteFile(tr_curve, rlt::TrainingCurveCsv(model));
      PrintMetrics("valid", rlt::EvalBatch(parts.valid.column(label).flags(), model.Predict(parts.valid)));
    } else if (chosen == predict) {
      const rlt::Table table = ReadTable(pr_table, pr_schema);
      const rlt::GbdtModel model = rlt::GbdtModel::Load(pr_model);
      rlt::WriteFile(pr_out, rlt::PredictionsCsv(table, model.Predict(table)));
    } else if (chosen == evaluate) {
      const rlt::Table table = ReadTable(ev_table, ev_schema);
      std::string label = ev_label;
      if (label == "install" || label == "click") {
        const auto* column = table.FindByRole(label == "install" ? rlt::ColumnRole::kLabelInstall
                                                                 : rlt::ColumnRole::kLabelClick);
        if (column == nullptr) throw rlt::Error("table has no " + label + " label");
        label = column->name();
      }
      std::vector<double> predictions;
      if (!ev_model.empty()) {
        predictions = rlt::GbdtModel::Load(ev_model).Predict(table);
      } else if (!ev_predictions.empty()) {
        std::stringstream lines(rlt::ReadFile(ev_predictions));
        std::string line;
        while (std::getline(lines, line)) {
          if (line.empty()) continue;
          const auto comma = line.find(',');
          if (comma == std::string::npos) throw rlt::Error("prediction line without a comma: " + line);
          predictions.push_back(std::stod(line.substr(comma + 1)));
        }
      } else {
        throw rlt::Error("give --predictions or --model");
      }
      PrintMetrics("evaluate", rlt::EvalBatch(table.column(label).flags(), predictions));
    } else if (chosen == ablate) {
      const rlt::PipelineConfig config = rlt::PipelineConfig::Load(ab_config);
      const auto variants = ab_variants.empty() ? config.ablation : SplitList(ab_variants);
      std::cout << rlt::AblationCsv(rlt::Ablate(config, variants));
    } else if (chosen == run) {
      const rlt::PipelineConfig config = rlt::PipelineConfig::Load(run_config);
      const rlt::RunResult result = rlt::RunPipeline(config);
      if (result.valid) std::cout << "valid " << result.valid->ToJson().dump() << "\n";
      if (result.test) std::cout << "test " << result.test->ToJson().dump() << "\n";
      std::cout << "artifacts in " << config.output_dir << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "rlt " << chosen->get_name() << ": error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
