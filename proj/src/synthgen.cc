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

#include "rlt/synthgen.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rlt/common.h"
#include "rlt/metrics.h"
#include "rlt/random.h"

namespace rlt {
namespace {

enum Stream : std::uint64_t { kCategoryStream = 1, kRowStream = 2, kMaskStream = 3 };

double NormalCdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

struct CategoryModel {
  std::vector<double> cdf;         // Over popularity ranks.
  std::vector<std::int32_t> ids;   // Category id at each rank.
  std::vector<double> effect;      // Latent effect per category id.
  std::vector<double> popularity;  // Standardized log-popularity per id.
};

CategoryModel BuildCategoryModel(int cardinality, double exponent, Rng& rng) {
  CategoryModel model;
  const auto n = static_cast<std::size_t>(cardinality);
  std::vector<double> weight(n);
  for (std::size_t r = 0; r < n; ++r) {
    weight[r] = std::pow(static_cast<double>(r + 1), -exponent);
  }
  model.cdf.resize(n);
  std::partial_sum(weight.begin(), weight.end(), model.cdf.begin());
  for (auto& c : model.cdf) c /= model.cdf.back();

  model.ids.resize(n);
  std::iota(model.ids.begin(), model.ids.end(), 0);
  rng.Shuffle(model.ids);

  model.effect.resize(n);
  for (auto& e : model.effect) e = rng.Normal();

  std::vector<double> log_weight(n);
  for (std::size_t r = 0; r < n; ++r) log_weight[r] = std::log(weight[r]);
  const double mean = std::accumulate(log_weight.begin(), log_weight.end(), 0.0) / n;
  double var = 0.0;
  for (const auto lw : log_weight) var += (lw - mean) * (lw - mean);
  const double sd = n > 1 ? std::sqrt(var / n) : 1.0;
  model.popularity.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    model.popularity[model.ids[r]] = sd > 0 ? (log_weight[r] - mean) / sd : 0.0;
  }
  return model;
}

template <typename T>
nlohmann::json PairsToJson(const std::vector<std::pair<int, T>>& pairs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [index, value] : pairs) out.push_back({{"column", index}, {"coef", value}});
  return out;
}

std::vector<std::pair<int, double>> PairsFromJson(const nlohmann::json& json) {
  std::vector<std::pair<int, double>> out;
  for (const auto& entry : json) {
    out.emplace_back(entry.at("column").get<int>(), entry.at("coef").get<double>());
  }
  return out;
}

}  // namespace

std::string CategoricalName(int index) { return "c_" + std::to_string(index); }
std::string ContinuousName(int index) { return "x_" + std::to_string(index); }
std::string BinaryName(int index) { return "b_" + std::to_string(index); }

void SynthSpec::Validate() const {
  auto fail = [](const std::string& message) { throw Error("synth spec: " + message); };
  if (n_rows_per_day == 0) fail("n_rows_per_day must be positive");
  if (first_day < 0 || last_day < first_day) fail("days must be a non-empty range of non-negative integers");
  if (n_cont < 0 || n_binary < 0) fail("feature counts must be non-negative");
  for (const auto card : cat_cardinalities) {
    if (card < 2) fail("categorical cardinalities must be >= 2");
  }
  if (zipf_exponent < 0) fail("zipf_exponent must be non-negative");
  if (binary_rate < 0 || binary_rate > 1) fail("binary_rate must be in [0,1]");
  if (cont_missing_rate < 0 || cont_missing_rate >= 1) fail("cont_missing_rate must be in [0,1)");
  auto check_cont = [&](int column, const char* what) {
    if (column < 0 || column >= n_cont) {
      fail(std::string(what) + " references continuous column " + std::to_string(column) +
           " but n_cont = " + std::to_string(n_cont));
    }
  };
  for (const auto& s : shifted_features) check_cont(s.column, "shifted feature");
  std::set<int> arithmetic;
  for (const auto& a : arithmetic_features) {
    check_cont(a.column, "arithmetic feature");
    if (!(a.delta > 0) || !std::isfinite(a.delta)) fail("arithmetic delta must be positive");
    if (a.max_multiplier < 1) fail("arithmetic max_multiplier must be >= 1");
    if (!arithmetic.insert(a.column).second) fail("duplicate arithmetic feature");
  }
  std::set<int> grouped;
  for (const auto& g : latent_groups) {
    if (!(g.loading >= -1 && g.loading <= 1)) fail("latent loading must be in [-1,1]");
    for (const auto c : g.columns) {
      check_cont(c, "latent group");
      if (!grouped.insert(c).second) fail("a column belongs to two latent groups");
    }
  }
  for (const auto& [c, coef] : label_model.continuous_coefs) check_cont(c, "label model");
  for (const auto& [c, coef] : label_model.binary_coefs) {
    if (c < 0 || c >= n_binary) fail("label model references binary column " + std::to_string(c));
  }
  for (const auto& e : label_model.categorical_effects) {
    if (e.column < 0 || e.column >= n_cat()) {
      fail("label model references categorical column " + std::to_string(e.column));
    }
  }
}

SynthSpec SynthSpec::Default() {
  SynthSpec spec;
  spec.cat_cardinalities = {20, 300, 3000, 20000};
  spec.n_cont = 12;
  spec.n_binary = 2;
  spec.cont_missing_rate = 0.02;
  spec.arithmetic_features = {
      {0, 0.0385, 100}, {1, 0.0385, 100}, {2, 0.0385, 60}, {3, 0.5711, 30}, {4, 0.5711, 30}};
  spec.latent_groups = {{{0, 1, 2}, 0.8}, {{3, 4}, 0.7}, {{8, 9}, 0.6}};
  spec.shifted_features = {{5, 2.0}};
  spec.label_model.intercept = -2.0;
  spec.label_model.continuous_coefs = {{0, 0.02}, {3, -0.05}, {6, 0.5}, {7, -0.4}};
  spec.label_model.binary_coefs = {{0, 0.5}};
  spec.label_model.categorical_effects = {
      {0, 0.5, 0.0}, {1, 0.6, 0.0}, {2, 0.0, 0.4}, {3, 0.8, 0.2}};
  return spec;
}

nlohmann::json SynthSpec::ToJson() const {
  nlohmann::json shifted = nlohmann::json::array();
  for (const auto& s : shifted_features) {
    shifted.push_back({{"column", s.column}, {"magnitude", s.magnitude}});
  }
  nlohmann::json arithmetic = nlohmann::json::array();
  for (const auto& a : arithmetic_features) {
    arithmetic.push_back(
        {{"column", a.column}, {"delta", a.delta}, {"max_multiplier", a.max_multiplier}});
  }
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : latent_groups) {
    groups.push_back({{"columns", g.columns}, {"loading", g.loading}});
  }
  nlohmann::json effects = nlohmann::json::array();
  for (const auto& e : label_model.categorical_effects) {
    effects.push_back({{"column", e.column},
                       {"effect_scale", e.effect_scale},
                       {"popularity_coef", e.popularity_coef}});
  }
  return {
      {"n_rows_per_day", n_rows_per_day},
      {"days", {first_day, last_day}},
      {"n_cat", n_cat()},
      {"cat_cardinalities", cat_cardinalities},
      {"zipf_exponent", zipf_exponent},
      {"n_cont", n_cont},
      {"n_binary", n_binary},
      {"binary_rate", binary_rate},
      {"cont_missing_rate", cont_missing_rate},
      {"shifted_features", shifted},
      {"arithmetic_features", arithmetic},
      {"latent_groups", groups},
      {"label_model",
       {{"intercept", label_model.intercept},
        {"continuous", PairsToJson(label_model.continuous_coefs)},
        {"binary", PairsToJson(label_model.binary_coefs)},
        {"categorical", effects},
        {"click_intercept", label_model.click_intercept},
        {"click_scale", label_model.click_scale}}},
      {"seed", seed},
  };
}

SynthSpec SynthSpec::FromJson(const nlohmann::json& json) {
  SynthSpec spec = Default();
  try {
    if (json.contains("n_rows_per_day")) spec.n_rows_per_day = json["n_rows_per_day"].get<std::size_t>();
    if (json.contains("days")) {
      spec.first_day = json["days"].at(0).get<int>();
      spec.last_day = json["days"].at(1).get<int>();
    }
    if (json.contains("cat_cardinalities")) {
      spec.cat_cardinalities = json["cat_cardinalities"].get<std::vector<int>>();
    }
    if (json.contains("n_cat") && json["n_cat"].get<int>() != spec.n_cat()) {
      throw Error("synth spec: n_cat does not match cat_cardinalities");
    }
    spec.zipf_exponent = json.value("zipf_exponent", spec.zipf_exponent);
    spec.n_cont = json.value("n_cont", spec.n_cont);
    spec.n_binary = json.value("n_binary", spec.n_binary);
    spec.binary_rate = json.value("binary_rate", spec.binary_rate);
    spec.cont_missing_rate = json.value("cont_missing_rate", spec.cont_missing_rate);
    if (json.contains("shifted_features")) {
      spec.shifted_features.clear();
      for (const auto& s : json["shifted_features"]) {
        spec.shifted_features.push_back({s.at("column").get<int>(), s.at("magnitude").get<double>()});
      }
    }
    if (json.contains("arithmetic_features")) {
      spec.arithmetic_features.clear();
      for (const auto& a : json["arithmetic_features"]) {
        spec.arithmetic_features.push_back({a.at("column").get<int>(), a.at("delta").get<double>(),
                                            a.at("max_multiplier").get<int>()});
      }
    }
    if (json.contains("latent_groups")) {
      spec.latent_groups.clear();
      for (const auto& g : json["latent_groups"]) {
        spec.latent_groups.push_back(
            {g.at("columns").get<std::vector<int>>(), g.at("loading").get<double>()});
      }
    }
    if (json.contains("label_model")) {
      const auto& lm = json["label_model"];
      auto& out = spec.label_model;
      out.intercept = lm.value("intercept", out.intercept);
      if (lm.contains("continuous")) out.continuous_coefs = PairsFromJson(lm["continuous"]);
      if (lm.contains("binary")) out.binary_coefs = PairsFromJson(lm["binary"]);
      if (lm.contains("categorical")) {
        out.categorical_effects.clear();
        for (const auto& e : lm["categorical"]) {
          out.categorical_effects.push_back({e.at("column").get<int>(), e.value("effect_scale", 0.0),
                                             e.value("popularity_coef", 0.0)});
        }
      }
      out.click_intercept = lm.value("click_intercept", out.click_intercept);
      out.click_scale = lm.value("click_scale", out.click_scale);
    }
    spec.seed = json.value("seed", spec.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("synth spec: ") + e.what());
  }
  return spec;
}

nlohmann::json GroundTruth::ToJson(const SynthSpec& spec) const {
  nlohmann::json planted = nlohmann::json::array();
  for (const auto& [name, delta] : deltas) planted.push_back({{"feature", name}, {"delta", delta}});
  nlohmann::json shifted = nlohmann::json::array();
  for (const auto& [name, magnitude] : shifts) {
    shifted.push_back({{"feature", name}, {"magnitude", magnitude}, {"day", shift_day}});
  }
  nlohmann::json coefficients = nlohmann::json::object();
  for (const auto& [c, coef] : spec.label_model.continuous_coefs) coefficients[ContinuousName(c)] = coef;
  for (const auto& [c, coef] : spec.label_model.binary_coefs) coefficients[BinaryName(c)] = coef;
  return {
      {"spec", spec.ToJson()},
      {"intercept", spec.label_model.intercept},
      {"coefficients", coefficients},
      {"planted_deltas", planted},
      {"shifted_features", shifted},
      {"multipliers", multipliers},
      {"install_probability", install_probability},
      {"click_probability", click_probability},
  };
}

SynthResult Generate(const SynthSpec& spec) {
  spec.Validate();
  const auto& lm = spec.label_model;
  const int n_days = spec.last_day - spec.first_day + 1;
  const std::size_t n = spec.n_rows_per_day * static_cast<std::size_t>(n_days);

  Rng category_rng(DeriveSeed(spec.seed, kCategoryStream));
  std::vector<CategoryModel> categories;
  for (const auto card : spec.cat_cardinalities) {
    categories.push_back(BuildCategoryModel(card, spec.zipf_exponent, category_rng));
  }

  // Per continuous column: latent group (-1 if none), loading, arithmetic
  // config (-1 if none), shift.
  std::vector<int> group_of(spec.n_cont, -1);
  std::vector<double> loading_of(spec.n_cont, 0.0);
  for (std::size_t g = 0; g < spec.latent_groups.size(); ++g) {
    for (const auto c : spec.latent_groups[g].columns) {
      group_of[c] = static_cast<int>(g);
      loading_of[c] = spec.latent_groups[g].loading;
    }
  }
  std::vector<int> arithmetic_of(spec.n_cont, -1);
  for (std::size_t a = 0; a < spec.arithmetic_features.size(); ++a) {
    arithmetic_of[spec.arithmetic_features[a].column] = static_cast<int>(a);
  }
  std::vector<double> shift_of(spec.n_cont, 0.0);
  for (const auto& s : spec.shifted_features) shift_of[s.column] += s.magnitude;

  std::vector<std::int64_t> ids(n);
  std::vector<std::int32_t> days(n);
  std::vector<std::vector<std::int32_t>> cat_codes(spec.n_cat(), std::vector<std::int32_t>(n));
  std::vector<std::vector<std::uint8_t>> binaries(spec.n_binary, std::vector<std::uint8_t>(n));
  std::vector<std::vector<double>> conts(spec.n_cont, std::vector<double>(n));
  std::vector<std::uint8_t> clicks(n), installs(n);

  GroundTruth truth;
  truth.install_probability.resize(n);
  truth.click_probability.resize(n);
  truth.shift_day = spec.last_day;
  std::vector<std::vector<std::int64_t>> multipliers(spec.arithmetic_features.size(),
                                                     std::vector<std::int64_t>(n));

  Rng rng(DeriveSeed(spec.seed, kRowStream));
  std::vector<double> latent(spec.latent_groups.size());
  std::vector<double> signal(spec.n_cont);
  std::vector<std::int32_t> category_id(spec.n_cat());
  std::size_t row = 0;
  for (int day = spec.first_day; day <= spec.last_day; ++day) {
    const bool shifted_day = day == spec.last_day;
    for (std::size_t i = 0; i < spec.n_rows_per_day; ++i, ++row) {
      ids[row] = static_cast<std::int64_t>(row);
      days[row] = day;
      for (int c = 0; c < spec.n_cat(); ++c) {
        const auto& model = categories[c];
        const double u = rng.Uniform();
        auto rank = static_cast<std::size_t>(
            std::upper_bound(model.cdf.begin(), model.cdf.end(), u) - model.cdf.begin());
        rank = std::min(rank, model.cdf.size() - 1);
        category_id[c] = model.ids[rank];
      }
      for (int b = 0; b < spec.n_binary; ++b) {
        binaries[b][row] = rng.Bernoulli(spec.binary_rate) ? 1 : 0;
      }
      for (auto& z : latent) z = rng.Normal();
      for (int c = 0; c < spec.n_cont; ++c) {
        const double noise = rng.Normal();
        double x = noise;
        if (group_of[c] >= 0) {
          const double l = loading_of[c];
          x = l * latent[group_of[c]] + std::sqrt(1.0 - l * l) * noise;
        }
        if (shifted_day) x += shift_of[c];
        if (arithmetic_of[c] >= 0) {
          const auto& a = spec.arithmetic_features[arithmetic_of[c]];
          const auto k = std::min<std::int64_t>(
              a.max_multiplier,
              static_cast<std::int64_t>(std::floor(NormalCdf(x) * (a.max_multiplier + 1))));
          multipliers[arithmetic_of[c]][row] = k;
          conts[c][row] = static_cast<double>(k) * a.delta;
          signal[c] = static_cast<double>(k);
        } else {
          conts[c][row] = x;
          signal[c] = x;
        }
      }

      double eta = lm.intercept;
      for (const auto& [c, coef] : lm.continuous_coefs) eta += coef * signal[c];
      for (const auto& [b, coef] : lm.binary_coefs) eta += coef * binaries[b][row];
      for (const auto& e : lm.categorical_effects) {
        const auto id = category_id[e.column];
        eta += e.effect_scale * categories[e.column].effect[id] +
               e.popularity_coef * categories[e.column].popularity[id];
      }
      const double p_install = Sigmoid(eta);
      const double p_click = Sigmoid(lm.click_intercept + lm.click_scale * (eta - lm.intercept));
      truth.install_probability[row] = p_install;
      truth.click_probability[row] = p_click;
      installs[row] = rng.Bernoulli(p_install) ? 1 : 0;
      clicks[row] = rng.Bernoulli(p_click) ? 1 : 0;
      for (int c = 0; c < spec.n_cat(); ++c) cat_codes[c][row] = category_id[c];
    }
  }

  if (spec.cont_missing_rate > 0) {
    Rng mask_rng(DeriveSeed(spec.seed, kMaskStream));
    for (int c = 0; c < spec.n_cont; ++c) {
      for (std::size_t r = 0; r < n; ++r) {
        if (mask_rng.Bernoulli(spec.cont_missing_rate)) {
          conts[c][r] = std::numeric_limits<double>::quiet_NaN();
        }
      }
    }
  }

  std::vector<Column> columns;
  columns.push_back(Column::RowId(kRowIdName, std::move(ids)));
  columns.push_back(Column::Day(kDayName, std::move(days)));
  for (int c = 0; c < spec.n_cat(); ++c) {
    std::vector<std::string> tokens(n);
    for (std::size_t r = 0; r < n; ++r) tokens[r] = std::to_string(cat_codes[c][r]);
    columns.push_back(Column::FromTokens(CategoricalName(c), tokens));
  }
  for (int b = 0; b < spec.n_binary; ++b) {
    columns.push_back(Column::Binary(BinaryName(b), std::move(binaries[b])));
  }
  for (int c = 0; c < spec.n_cont; ++c) {
    columns.push_back(Column::Continuous(ContinuousName(c), std::move(conts[c])));
  }
  columns.push_back(Column::Binary(kClickName, std::move(clicks), ColumnRole::kLabelClick));
  columns.push_back(Column::Binary(kInstallName, std::move(installs), ColumnRole::kLabelInstall));

  for (std::size_t a = 0; a < spec.arithmetic_features.size(); ++a) {
    const auto& feature = spec.arithmetic_features[a];
    const auto name = ContinuousName(feature.column);
    truth.multipliers[name] = std::move(multipliers[a]);
    truth.deltas[name] = feature.delta;
  }
  for (const auto& s : spec.shifted_features) truth.shifts[ContinuousName(s.column)] += s.magnitude;

  return {Table::FromColumns(std::move(columns)), std::move(truth)};
}

}  // namespace rlt
