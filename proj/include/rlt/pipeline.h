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

// End-to-end runs: ingest, split, adversarial filter, denoise, encode,
// train, evaluate; plus the cumulative ablation runner.

#ifndef RLT_PIPELINE_H_
#define RLT_PIPELINE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "rlt/advval.h"
#include "rlt/common.h"
#include "rlt/denoise.h"
#include "rlt/encoders.h"
#include "rlt/gbdt.h"
#include "rlt/table.h"

namespace rlt {

struct StageToggles {
  bool adversarial = true;
  bool denoise = true;
  bool frequency = true;
  bool target = true;
  bool train = true;
};

struct SplitConfig {
  std::optional<std::set<std::int32_t>> train_days;  // Default: every day before valid_day.
  std::int32_t valid_day = 66;
  std::optional<std::int32_t> test_day = 67;

  SplitPlan Resolve(const Table& table) const;
};

struct PipelineConfig {
  std::uint64_t seed = 2023;
  int threads = 0;
  std::string label = "install";  // "install", "click", or a label column name.

  std::vector<std::string> train_paths;
  std::vector<std::string> test_paths;
  std::string cache_path;  // Binary table; read if present, written otherwise.
  std::string output_dir = "rlt_out";
  std::optional<Schema> schema;  // Required when reading CSV.

  SplitConfig split;
  AdvConfig adversarial;
  bool reaudit_encoded = false;
  DenoiseOptions denoise;
  FreqWindow window = FreqWindow::kPrevWeek;
  double target_smoothing = kDefaultTargetSmoothing;
  bool drop_original = false;
  std::vector<EncoderSpec> encoder_specs;  // Empty: defaults from the stage toggles.
  GbdtParams gbdt;
  StageToggles stages;
  std::vector<std::string> ablation = {"vanilla", "frequency", "denoise", "target"};

  // Sections: run, paths, schema, split, adversarial, denoise, encoders,
  // gbdt, stages, ablation. Missing sections keep defaults. The run seed
  // and thread count flow into sections that do not set their own.
  static PipelineConfig FromJson(const nlohmann::json& json);
  // Reads the file and applies RLT_<SECTION>_<KEY> environment overrides.
  static PipelineConfig Load(const std::string& path);
  nlohmann::json ToJson() const;
  void Validate() const;
};

// Sets json[section][key] for every RLT_<SECTION>_<KEY>=value entry in
// `env`. Values are parsed as JSON when possible, else kept as strings.
void ApplyEnvOverrides(nlohmann::json& json, const std::map<std::string, std::string>& env);
std::map<std::string, std::string> CurrentEnvironment();

class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& cause)
      : Error("stage '" + stage + "' failed: " + cause), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct SplitMetrics {
  double logloss = 0.0;
  double auc = 0.0;
  double nce = 0.0;
  nlohmann::json ToJson() const;
};

struct RunResult {
  nlohmann::json report;   // Deterministic; written as report.json.
  nlohmann::json timings;  // Wall-clock seconds per stage.
  std::optional<SplitMetrics> valid;
  std::optional<SplitMetrics> test;
  std::vector<double> valid_predictions;
  std::vector<double> test_predictions;
  std::optional<GbdtModel> model;
  std::optional<AdvReport> adversarial;
  std::set<std::string> dropped;
};

Table LoadInput(const PipelineConfig& config);

// Runs every enabled stage. With write_artifacts, files go to
// config.output_dir; completed stages keep their files if a later one fails.
RunResult RunPipeline(const PipelineConfig& config, bool write_artifacts = true);
// Same, on an already ingested table.
RunResult RunPipelineOn(const PipelineConfig& config, const Table& table, bool write_artifacts);

struct AblationRow {
  std::string variant;
  SplitMetrics valid;
  std::optional<SplitMetrics> test;
};

// Variant names: vanilla, adversarial, denoise, frequency, target. The
// first variant runs with those stages off; each later one switches its
// stage on, cumulatively. Writes ablation.csv when write_artifacts.
std::vector<AblationRow> Ablate(const PipelineConfig& config, const std::vector<std::string>& variants,
                                bool write_artifacts = true);
std::string AblationCsv(const std::vector<AblationRow>& rows);

}  // namespace rlt

#endif  // RLT_PIPELINE_H_
