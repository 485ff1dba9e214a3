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

#include <algorithm>
#include <cctype>
#include <cstring>

#include "rlt/pipeline.h"
#include "rlt/random.h"

extern char** environ;

namespace rlt {
namespace {

constexpr const char* kSections[] = {"run",      "paths",    "schema", "split",  "adversarial",
                                     "denoise",  "encoders", "gbdt",   "stages", "ablation"};
constexpr const char* kVariants[] = {"vanilla", "adversarial", "denoise", "frequency", "target"};

// Stream ids for seeds derived from the run seed.
constexpr std::uint64_t kAdversarialSeedStream = 101;
constexpr std::uint64_t kGbdtSeedStream = 102;

std::vector<std::string> PathList(const nlohmann::json& value) {
  if (value.is_string()) return {value.get<std::string>()};
  return value.get<std::vector<std::string>>();
}

void CheckKeys(const nlohmann::json& section, const std::string& name,
               std::initializer_list<const char*> allowed) {
  if (!section.is_object()) throw Error("config section '" + name + "' must be an object");
  for (const auto& [key, value] : section.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return key == k; })) {
      throw Error("config section '" + name + "': unknown key '" + key + "'");
    }
  }
}

}  // namespace

SplitPlan SplitConfig::Resolve(const Table& table) const {
  SplitPlan plan;
  plan.valid_day = valid_day;
  plan.test_day = test_day;
  if (train_days) {
    plan.train_days = *train_days;
  } else {
    const auto [lo, hi] = table.DayRange();
    for (std::int32_t d = lo; d < std::min(valid_day, hi + 1); ++d) plan.train_days.insert(d);
  }
  plan.Validate();
  return plan;
}

PipelineConfig PipelineConfig::FromJson(const nlohmann::json& json) {
  PipelineConfig config;
  if (!json.is_object()) throw Error("config must be a JSON object");
  try {
    for (const auto& [key, value] : json.items()) {
      if (std::none_of(std::begin(kSections), std::end(kSections),
                       [&](const char* s) { return key == s; })) {
        throw Error("config: unknown section '" + key + "'");
      }
    }
    const nlohmann::json empty = nlohmann::json::object();
    const auto section = [&](const char* name) -> const nlohmann::json& {
      return json.contains(name) ? json.at(name) : empty;
    };

    const auto& run = section("run");
    CheckKeys(run, "run", {"seed", "threads", "label"});
    config.seed = run.value("seed", config.seed);
    config.threads = run.value("threads", config.threads);
    config.label = run.value("label", config.label);

    const auto& paths = section("paths");
    CheckKeys(paths, "paths", {"train", "test", "cache", "output_dir"});
    if (paths.contains("train")) config.train_paths = PathList(paths.at("train"));
    if (paths.contains("test")) config.test_paths = PathList(paths.at("test"));
    config.cache_path = paths.value("cache", config.cache_path);
    config.output_dir = paths.value("output_dir", config.output_dir);

    if (json.contains("schema")) {
      const auto& schema = json.at("schema");
      config.schema = schema.is_string() ? Schema::Load(schema.get<std::string>()) : Schema::FromJson(schema);
    }

    const auto& split = section("split");
    CheckKeys(split, "split", {"train_days", "valid_day", "test_day"});
    if (split.contains("train_days") && !split.at("train_days").is_null()) {
      const auto days = split.at("train_days").get<std::vector<std::int32_t>>();
      config.split.train_days = std::set<std::int32_t>(days.begin(), days.end());
    }
    config.split.valid_day = split.value("valid_day", config.split.valid_day);
    if (split.contains("test_day")) {
      const auto& t = split.at("test_day");
      config.split.test_day = t.is_null() ? std::nullopt : std::optional<std::int32_t>(t.get<std::int32_t>());
    }

    const auto& adversarial = section("adversarial");
    config.adversarial.Override(adversarial);
    config.reaudit_encoded = adversarial.value("reaudit_encoded", false);
    if (!adversarial.contains("seed")) {
      config.adversarial.seed = DeriveSeed(config.seed, kAdversarialSeedStream);
    }
    if (!adversarial.contains("num_threads")) config.adversarial.num_threads = config.threads;

    const auto& denoise = section("denoise");
    CheckKeys(denoise, "denoise", {"tol_rel", "origin", "as_categorical", "features"});
    config.denoise.tol_rel = denoise.value("tol_rel", config.denoise.tol_rel);
    if (denoise.contains("origin")) {
      config.denoise.origin = ParseQuantizeOrigin(denoise.at("origin").get<std::string>());
    }
    config.denoise.as_categorical = denoise.value("as_categorical", config.denoise.as_categorical);
    if (denoise.contains("features")) {
      config.denoise.features = denoise.at("features").get<std::vector<std::string>>();
    }

    const auto& encoders = section("encoders");
    CheckKeys(encoders, "encoders", {"window", "a", "drop_original", "specs"});
    if (encoders.contains("window")) config.window = ParseWindow(encoders.at("window").get<std::string>());
    config.target_smoothing = encoders.value("a", config.target_smoothing);
    config.drop_original = encoders.value("drop_original", config.drop_original);
    if (encoders.contains("specs")) {
      for (const auto& spec : encoders.at("specs")) config.encoder_specs.push_back(EncoderSpec::FromJson(spec));
    }

    const auto& gbdt = section("gbdt");
    config.gbdt.Override(gbdt);
    if (!gbdt.contains("seed")) config.gbdt.seed = DeriveSeed(config.seed, kGbdtSeedStream);
    if (!gbdt.contains("num_threads")) config.gbdt.num_threads = config.threads;

    const auto& stages = section("stages");
    CheckKeys(stages, "stages", {"adversarial", "denoise", "frequency", "target", "train"});
    config.stages.adversarial = stages.value("adversarial", config.stages.adversarial);
    config.stages.denoise = stages.value("denoise", config.stages.denoise);
    config.stages.frequency = stages.value("frequency", config.stages.frequency);
    config.stages.target = stages.value("target", config.stages.target);
    config.stages.train = stages.value("train", config.stages.train);

    if (json.contains("ablation")) {
      const auto& ablation = json.at("ablation");
      if (ablation.is_array()) {
        config.ablation = ablation.get<std::vector<std::string>>();
      } else {
        CheckKeys(ablation, "ablation", {"variants"});
        if (ablation.contains("variants")) {
          config.ablation = ablation.at("variants").get<std::vector<std::string>>();
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  config.Validate();
  return config;
}

nlohmann::json PipelineConfig::ToJson() const {
  nlohmann::json json;
  json["run"] = {{"seed", seed}, {"threads", threads}, {"label", label}};
  json["paths"] = {{"train", train_paths},
                   {"test", test_paths},
                   {"cache", cache_path},
                   {"output_dir", output_dir}};
  if (schema) json["schema"] = schema->ToJson();
  nlohmann::json split_json = {{"valid_day", split.valid_day}};
  split_json["train_days"] = split.train_days ? nlohmann::json(*split.train_days) : nlohmann::json(nullptr);
  split_json["test_day"] = split.test_day ? nlohmann::json(*split.test_day) : nlohmann::json(nullptr);
  json["split"] = split_json;
  json["adversarial"] = adversarial.ToJson();
  json["adversarial"]["reaudit_encoded"] = reaudit_encoded;
  json["denoise"] = {{"tol_rel", denoise.tol_rel},
                     {"origin", denoise.origin == QuantizeOrigin::kZero ? "zero" : "vmin"},
                     {"as_categorical", denoise.as_categorical},
                     {"features", denoise.features}};
  nlohmann::json specs = nlohmann::json::array();
  for (const auto& spec : encoder_specs) specs.push_back(spec.ToJson());
  json["encoders"] = {{"window", WindowName(window)},
                      {"a", target_smoothing},
                      {"drop_original", drop_original},
                      {"specs", specs}};
  json["gbdt"] = gbdt.ToJson();
  json["stages"] = {{"adversarial", stages.adversarial},
                    {"denoise", stages.denoise},
                    {"frequency", stages.frequency},
                    {"target", stages.target},
                    {"train", stages.train}};
  json["ablation"] = {{"variants", ablation}};
  return json;
}

void PipelineConfig::Validate() const {
  if (threads < 0) throw Error("config: run.threads must be >= 0");
  if (output_dir.empty()) throw Error("config: paths.output_dir must not be empty");
  if (!(denoise.tol_rel > 0)) throw Error("config: denoise.tol_rel must be positive");
  if (!(target_smoothing > 0)) throw Error("config: encoders.a must be positive");
  if (split.test_day && *split.test_day <= split.valid_day) {
    throw Error("config: split.test_day must come after split.valid_day");
  }
  if (split.train_days) {
    for (const auto day : *split.train_days) {
      if (day >= split.valid_day) throw Error("config: train days must precede the validation day");
    }
  }
  adversarial.Validate();
  gbdt.Validate();
  for (const auto& variant : ablation) {
    if (std::none_of(std::begin(kVariants), std::end(kVariants),
                     [&](const char* v) { return variant == v; })) {
      throw Error("config: unknown ablation variant '" + variant +
                  "' (expected vanilla, adversarial, denoise, frequency or target)");
    }
  }
}

PipelineConfig PipelineConfig::Load(const std::string& path) {
  nlohmann::json json;
  try {
    json = nlohmann::json::parse(ReadFile(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(path + ": " + e.what());
  }
  ApplyEnvOverrides(json, CurrentEnvironment());
  return FromJson(json);
}

void ApplyEnvOverrides(nlohmann::json& json, const std::map<std::string, std::string>& env) {
  for (const auto& [name, raw] : env) {
    if (name.rfind("RLT_", 0) != 0) continue;
    std::string rest = name.substr(4);
    std::transform(rest.begin(), rest.end(), rest.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    const auto underscore = rest.find('_');
    if (underscore == std::string::npos) continue;
    const std::string section = rest.substr(0, underscore);
    const std::string key = rest.substr(underscore + 1);
    if (key.empty() || std::none_of(std::begin(kSections), std::end(kSections),
                                    [&](const char* s) { return section == s; })) {
      continue;
    }
    if (json.contains(section) && !json.at(section).is_object()) {
      throw Error("environment override " + name + ": section '" + section + "' is not an object");
    }
    nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    json[section][key] = std::move(value);
  }
}

std::map<std::string, std::string> CurrentEnvironment() {
  std::map<std::string, std::string> env;
  for (char** entry = environ; entry != nullptr && *entry != nullptr; ++entry) {
    const char* eq = std::strchr(*entry, '=');
    if (eq == nullptr) continue;
    env.emplace(std::string(*entry, static_cast<std::size_t>(eq - *entry)), std::string(eq + 1));
  }
  return env;
}

}  // namespace rlt
