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

// Acceptance suite: runs each numbered criterion, prints one PASS/FAIL line
// per criterion and exits non-zero if any failed.
//
//   acceptance [--rlt PATH] [--work DIR] [criterion...]
//
// Criterion 10 drives the command-line tool at PATH when given, and the
// in-process pipeline otherwise.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rlt/advval.h"
#include "rlt/common.h"
#include "rlt/denoise.h"
#include "rlt/encoders.h"
#include "rlt/gbdt.h"
#include "rlt/metrics.h"
#include "rlt/pipeline.h"
#include "rlt/random.h"
#include "rlt/synthgen.h"
#include "rlt/table.h"

namespace fs = std::filesystem;

namespace {

using rlt::Table;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failures; the first few messages are kept for the report line.
class Check {
 public:
  void Expect(bool ok, const std::string& message) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) messages_ += (messages_.empty() ? "" : "; ") + message;
  }
  void Note(const std::string& note) { notes_ += (notes_.empty() ? "" : ", ") + note; }
  Outcome Result() const {
    std::string detail = notes_;
    if (failures_ > 0) {
      detail += (detail.empty() ? "" : "; ") + std::to_string(failures_) + " failure(s): " + messages_;
    }
    return {failures_ == 0, detail};
  }

 private:
  int failures_ = 0;
  std::string messages_;
  std::string notes_;
};

std::string Fmt(double v, int precision = 6) {
  std::ostringstream out;
  out.precision(precision);
  out << v;
  return out.str();
}

std::vector<std::size_t> RowsWhere(const Table& table, const std::function<bool(std::int32_t)>& day_ok) {
  std::vector<std::size_t> rows;
  const auto days = table.day_column().days();
  for (std::size_t r = 0; r < days.size(); ++r) {
    if (day_ok(days[r])) rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------- 1

Outcome NceIdentity() {
  Check check;
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 5000;
    const double rate = std::uniform_real_distribution<double>(0.001, 0.999)(rng);
    std::vector<std::uint8_t> y(n);
    std::bernoulli_distribution coin(rate);
    for (auto& v : y) v = coin(rng);
    y[0] = 1;
    y[1] = 0;
    const double p = static_cast<double>(std::count(y.begin(), y.end(), 1)) / static_cast<double>(n);
    const std::vector<double> pred(n, p);
    const double nce = rlt::Nce(rlt::EvalBatch(y, pred)).nce;
    worst = std::max(worst, std::abs(nce - 1.0));
  }
  check.Expect(worst <= 1e-12, "max |NCE - 1| = " + Fmt(worst));
  check.Note("max |NCE - 1| = " + Fmt(worst, 3));
  return check.Result();
}

// ---------------------------------------------------------------- 2

double BruteForceAuc(const std::vector<std::uint8_t>& y, const std::vector<double>& p) {
  std::uint64_t twice_wins = 0, pairs = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!y[i]) continue;
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[j]) continue;
      ++pairs;
      twice_wins += p[i] > p[j] ? 2 : (p[i] == p[j] ? 1 : 0);
    }
  }
  return static_cast<double>(twice_wins) / (2.0 * static_cast<double>(pairs));
}

Outcome AucOracle() {
  Check check;
  std::mt19937_64 rng(2);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 499;
    // Few distinct score levels give heavy ties.
    const int levels = trial % 3 == 0 ? 2 + static_cast<int>(rng() % 5) : 1 + static_cast<int>(rng() % 1000);
    std::vector<std::uint8_t> y(n);
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng() % 2;
      p[i] = static_cast<double>(rng() % levels) / levels;
    }
    y[0] = 1;
    y[1] = 0;
    if (rlt::Auc(rlt::EvalBatch(y, p)) != BruteForceAuc(y, p)) ++mismatches;
  }
  check.Expect(mismatches == 0, std::to_string(mismatches) + " of 1000 batches differ");
  check.Note("1000 batches");
  return check.Result();
}

// ---------------------------------------------------------------- 3

double Loss(double s, std::uint8_t y) {
  // log(1 + exp(-s)) for y = 1, log(1 + exp(s)) for y = 0, computed stably.
  const double z = y ? -s : s;
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

Outcome GradientChecks() {
  Check check;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> score(-10.0, 10.0);
  const double h = 1e-4;
  double worst_g = 0, worst_h = 0;
  for (int i = 0; i < 10000; ++i) {
    const double s = score(rng);
    const std::uint8_t y = rng() % 2;
    const auto d = rlt::LossGradHess(s, y);
    const double fd_g = (Loss(s + h, y) - Loss(s - h, y)) / (2 * h);
    const auto dp = rlt::LossGradHess(s + h, y);
    const auto dm = rlt::LossGradHess(s - h, y);
    const double fd_h = (dp.grad - dm.grad) / (2 * h);
    worst_g = std::max(worst_g, std::abs(d.grad - fd_g));
    worst_h = std::max(worst_h, std::abs(d.hess - fd_h));
  }
  check.Expect(worst_g <= 1e-6, "grad error " + Fmt(worst_g));
  check.Expect(worst_h <= 1e-4, "hess error " + Fmt(worst_h));
  check.Note("max grad err " + Fmt(worst_g, 3) + ", max hess err " + Fmt(worst_h, 3));
  return check.Result();
}

// ---------------------------------------------------------------- 4

Outcome GbdtLearnability() {
  Check check;
  rlt::SynthSpec spec;
  spec.first_day = 1;
  spec.last_day = 11;
  spec.n_rows_per_day = 2000;
  spec.cat_cardinalities = {10};
  spec.n_cont = 4;
  spec.n_binary = 1;
  spec.label_model.intercept = 0.0;
  spec.label_model.continuous_coefs = {{0, 100.0}};
  spec.seed = 4;
  const Table table = rlt::Generate(spec).table;
  const Table train = table.SelectRows(RowsWhere(table, [](std::int32_t d) { return d <= 10; }));
  const Table valid = table.SelectRows(RowsWhere(table, [](std::int32_t d) { return d == 11; }));
  check.Note(std::to_string(train.n_rows()) + "/" + std::to_string(valid.n_rows()) + " rows");

  rlt::GbdtParams params;
  params.num_leaves = 31;
  params.learning_rate = 0.1;
  params.num_iterations = 200;
  params.early_stopping_rounds = 200;
  params.seed = 4;
  const rlt::GbdtModel model = rlt::Fit(params, train, valid, train.FeatureNames());
  const auto pred = model.Predict(valid);
  const rlt::EvalBatch batch(valid.column(rlt::kInstallName).flags(), pred);
  const double auc = rlt::Auc(batch), logloss = rlt::LogLoss(batch);
  check.Expect(auc >= 0.99, "valid AUC " + Fmt(auc));
  check.Expect(logloss <= 0.1, "valid logloss " + Fmt(logloss));
  check.Expect(model.best_iteration() <= 200, "more than 200 trees");
  const auto& curve = model.curve();
  for (std::size_t i = 1; i < curve.size(); ++i) {
    check.Expect(curve[i].train_logloss <= curve[i - 1].train_logloss + 1e-9,
                 "train logloss rose at iteration " + std::to_string(curve[i].iteration));
  }
  check.Note("AUC " + Fmt(auc, 4) + ", logloss " + Fmt(logloss, 4) + ", " +
             std::to_string(model.best_iteration()) + " trees");
  return check.Result();
}

// ---------------------------------------------------------------- 5

Outcome EarlyStopping() {
  Check check;
  rlt::SynthSpec spec = rlt::SynthSpec::Default();
  spec.first_day = 50;
  spec.n_rows_per_day = 1500;
  spec.seed = 5;
  const Table table = rlt::Generate(spec).table;
  const Table train = table.SelectRows(RowsWhere(table, [](std::int32_t d) { return d < 66; }));
  const Table valid = table.SelectRows(RowsWhere(table, [](std::int32_t d) { return d == 66; }));
  const Table test = table.SelectRows(RowsWhere(table, [](std::int32_t d) { return d == 67; }));
  const auto features = train.FeatureNames();

  rlt::GbdtParams params;
  params.num_leaves = 63;
  params.learning_rate = 0.2;
  params.num_iterations = 1000;
  params.early_stopping_rounds = 100;
  params.seed = 5;
  const rlt::GbdtModel model = rlt::Fit(params, train, valid, features);
  const int best = model.best_iteration();
  const auto& curve = model.curve();

  // First strict minimum of the validation curve; 0 is the no-tree baseline.
  const rlt::GbdtModel stump_free = [&] {
    rlt::GbdtParams p = params;
    p.num_iterations = 0;
    return rlt::Fit(p, train, valid, features);
  }();
  const auto base_pred = stump_free.Predict(valid);
  double best_loss = rlt::LogLoss(rlt::EvalBatch(valid.column(rlt::kInstallName).flags(), base_pred));
  int argmin = 0;
  for (const auto& rec : curve) {
    if (rec.valid_logloss < best_loss) {
      best_loss = rec.valid_logloss;
      argmin = rec.iteration;
    }
  }
  check.Expect(best == argmin, "retained " + std::to_string(best) + " trees, argmin " + std::to_string(argmin));
  check.Expect(!curve.empty() && curve.back().iteration >= best + 100,
               "training stopped before 100 post-optimum iterations");

  const auto reference = model.Predict(test);
  for (const auto& [iterations, rounds] : std::vector<std::pair<int, int>>{{best, 100}, {best + 100, 100},
                                                                            {best + 100, 100000}}) {
    rlt::GbdtParams p = params;
    p.num_iterations = iterations;
    p.early_stopping_rounds = rounds;
    const rlt::GbdtModel refit = rlt::Fit(p, train, valid, features);
    check.Expect(refit.best_iteration() == best, "refit with " + std::to_string(iterations) + " iterations kept " +
                                                     std::to_string(refit.best_iteration()) + " trees");
    check.Expect(refit.Predict(test) == reference,
                 "predictions changed with " + std::to_string(iterations) + " iterations");
  }
  check.Note("best iteration " + std::to_string(best) + " of " + std::to_string(curve.size()));
  return check.Result();
}

// ---------------------------------------------------------------- 6

Outcome AdversarialDetection() {
  Check check;
  double min_shift = 1.0, max_other = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    rlt::SynthSpec spec = rlt::SynthSpec::Default();
    spec.seed = seed;
    const rlt::SynthResult data = rlt::Generate(spec);
    const Table& table = data.table;
    const Table train = table.SelectRows(RowsWhere(table, [&](std::int32_t d) { return d < spec.last_day; }));
    const Table test = table.SelectRows(RowsWhere(table, [&](std::int32_t d) { return d == spec.last_day; }));
    check.Expect(train.FeatureNames().size() >= 10, "fewer than 10 features");
    rlt::AdvConfig config;
    config.seed = rlt::DeriveSeed(seed, 101);
    const rlt::AdvReport report = rlt::Audit(train, test, config);
    const std::string shifted = data.truth.shifts.begin()->first;
    check.Expect(data.truth.shifts.size() == 1 && data.truth.shifts.begin()->second == 2.0,
                 "expected one planted shift of 2.0");
    for (const auto& f : report.features) {
      if (f.name == shifted) {
        min_shift = std::min(min_shift, f.auc);
        check.Expect(f.auc >= 0.75 && f.verdict == rlt::Verdict::kDrop,
                     "seed " + std::to_string(seed) + ": " + f.name + " AUC " + Fmt(f.auc) + " not dropped");
      } else {
        max_other = std::max(max_other, f.auc);
        check.Expect(f.auc < 0.65, "seed " + std::to_string(seed) + ": " + f.name + " AUC " + Fmt(f.auc));
      }
    }
    check.Expect(report.Dropped() == std::set<std::string>{shifted}, "unexpected drops");
  }
  check.Note("shifted AUC min " + Fmt(min_shift, 4) + ", others max " + Fmt(max_other, 4));
  return check.Result();
}

// ---------------------------------------------------------------- 7

Outcome DenoiserRecovery() {
  Check check;
  rlt::SynthSpec spec = rlt::SynthSpec::Default();
  const rlt::SynthResult data = rlt::Generate(spec);
  const rlt::DenoiseResult result = rlt::DenoiseTable(data.table, rlt::DenoiseOptions{});
  std::size_t cells = 0;
  double worst = 0.0;
  std::set<double> planted;
  for (const auto& [name, delta] : data.truth.deltas) {
    planted.insert(delta);
    const auto it = std::find_if(result.estimates.begin(), result.estimates.end(),
                                 [&](const rlt::DeltaEstimate& e) { return e.feature == name; });
    if (it == result.estimates.end() || !it->detected) {
      check.Expect(false, name + " not detected");
      continue;
    }
    const double rel = std::abs(it->delta / delta - 1.0);
    worst = std::max(worst, rel);
    check.Expect(rel <= 1e-4, name + " delta " + Fmt(it->delta, 10));
    const rlt::Column& raw = data.table.column(name);
    const rlt::Column& q = result.table.column(name);
    const auto& ks = data.truth.multipliers.at(name);
    std::size_t wrong = 0;
    for (std::size_t r = 0; r < raw.size(); ++r) {
      if (!std::isfinite(raw.NumericValue(r))) continue;
      ++cells;
      if (q.IsMissing(r) || q.NumericValue(r) != static_cast<double>(ks[r])) ++wrong;
    }
    check.Expect(wrong == 0, name + ": " + std::to_string(wrong) + " cells differ");
  }
  check.Expect(planted == std::set<double>{0.0385, 0.5711}, "planted deltas differ from {0.0385, 0.5711}");
  check.Note(std::to_string(data.truth.deltas.size()) + " features, " + std::to_string(cells) +
             " cells, max rel err " + Fmt(worst, 3));
  return check.Result();
}

// ---------------------------------------------------------------- 8

struct Events {
  std::vector<std::int32_t> days;
  std::vector<std::string> cats;
  std::vector<std::uint8_t> clicks, installs;

  Table ToTable() const {
    return Table::FromColumns({rlt::Column::Day("day", days), rlt::Column::FromTokens("cat", cats),
                               rlt::Column::Binary("click", clicks, rlt::ColumnRole::kLabelClick),
                               rlt::Column::Binary("install", installs, rlt::ColumnRole::kLabelInstall)});
  }
};

Events RandomEvents(std::mt19937_64& rng, std::size_t n, int first_day, int last_day, int n_cats) {
  std::uniform_int_distribution<int> day(first_day, last_day), cat(0, n_cats - 1);
  std::bernoulli_distribution coin(0.35);
  Events e;
  for (std::size_t i = 0; i < n; ++i) {
    e.days.push_back(day(rng));
    e.cats.push_back("c" + std::to_string(cat(rng)));
    e.clicks.push_back(coin(rng));
    e.installs.push_back(coin(rng));
  }
  return e;
}

std::vector<rlt::EncoderState> FitAll(const Table& table) {
  return {rlt::FitFrequency(table, "cat", rlt::FreqWindow::kPrevDay),
          rlt::FitFrequency(table, "cat", rlt::FreqWindow::kPrevWeek),
          rlt::FitFrequency(table, "cat", rlt::FreqWindow::kAllHistory),
          rlt::FitTarget(table, "cat", "click"),
          rlt::FitTarget(table, "cat", "install")};
}

std::vector<std::vector<double>> EncodeAll(const Table& table) {
  std::vector<std::vector<double>> out;
  for (const auto& state : FitAll(table)) {
    const rlt::Column column = rlt::Transform(state, table);
    out.emplace_back(column.values().begin(), column.values().end());
  }
  return out;
}

Outcome EncoderLeakage() {
  Check check;
  std::mt19937_64 rng(8);
  std::size_t compared = 0;
  for (int t = 0; t < 50; ++t) {
    const int first = 1 + static_cast<int>(rng() % 5);
    const int last = first + 3 + static_cast<int>(rng() % 12);
    const Events base = RandomEvents(rng, 50 + rng() % 400, first, last, 2 + static_cast<int>(rng() % 12));
    const auto encoded = EncodeAll(base.ToTable());
    const std::string tag = "table " + std::to_string(t);

    for (std::size_t r = 0; r < base.days.size(); ++r) {
      check.Expect(encoded[0][r] <= encoded[1][r] && encoded[1][r] <= encoded[2][r], tag + ": nesting violated");
    }

    for (int d = first; d <= last; ++d) {
      // Permute labels among the rows of day d.
      Events permuted = base;
      std::vector<std::size_t> rows;
      for (std::size_t r = 0; r < base.days.size(); ++r) {
        if (base.days[r] == d) rows.push_back(r);
      }
      std::vector<std::size_t> shuffled = rows;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        permuted.clicks[rows[i]] = base.clicks[shuffled[i]];
        permuted.installs[rows[i]] = base.installs[shuffled[i]];
      }
      // Append rows strictly after day d, including unseen categories.
      const Events future = RandomEvents(rng, 1 + rng() % 200, d + 1, last + 5, 20);
      Events extended = permuted;
      extended.days.insert(extended.days.end(), future.days.begin(), future.days.end());
      extended.cats.insert(extended.cats.end(), future.cats.begin(), future.cats.end());
      extended.clicks.insert(extended.clicks.end(), future.clicks.begin(), future.clicks.end());
      extended.installs.insert(extended.installs.end(), future.installs.begin(), future.installs.end());

      const auto after_permute = EncodeAll(permuted.ToTable());
      const auto after_append = EncodeAll(extended.ToTable());
      for (std::size_t k = 0; k < encoded.size(); ++k) {
        for (std::size_t r : rows) {
          ++compared;
          check.Expect(after_permute[k][r] == encoded[k][r], tag + ": label permutation moved day " +
                                                                 std::to_string(d) + " encoder " + std::to_string(k));
          check.Expect(after_append[k][r] == encoded[k][r], tag + ": future rows moved day " +
                                                                std::to_string(d) + " encoder " + std::to_string(k));
        }
      }
    }
  }
  check.Note("50 tables, " + std::to_string(compared) + " cells compared");
  return check.Result();
}

// ---------------------------------------------------------------- 9

void WriteBenchmark(const fs::path& dir, std::uint64_t seed) {
  rlt::SynthSpec spec = rlt::SynthSpec::Default();
  spec.seed = seed;
  const Table table = rlt::Generate(spec).table;
  fs::create_directories(dir);
  rlt::WriteCsv(table.SelectRows(RowsWhere(table, [&](std::int32_t d) { return d < spec.last_day; })),
                (dir / "train.csv").string());
  rlt::WriteCsv(table.SelectRows(RowsWhere(table, [&](std::int32_t d) { return d == spec.last_day; })),
                (dir / "test.csv").string());
  rlt::WriteFile((dir / "schema.json").string(), table.schema().ToJson().dump(2) + "\n");
}

nlohmann::json BenchmarkConfig(const fs::path& dir, std::uint64_t seed) {
  return {{"run", {{"seed", seed}}},
          {"paths",
           {{"train", (dir / "train.csv").string()},
            {"test", (dir / "test.csv").string()},
            {"output_dir", (dir / "out").string()}}},
          {"schema", (dir / "schema.json").string()}};
}

Outcome AblationDirection(const fs::path& work) {
  Check check;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const fs::path dir = work / ("ablation_" + std::to_string(seed));
    WriteBenchmark(dir, seed);
    const rlt::PipelineConfig config = rlt::PipelineConfig::FromJson(BenchmarkConfig(dir, seed));
    const auto rows = rlt::Ablate(config, {"vanilla", "frequency", "denoise", "target"}, false);
    std::string losses;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      losses += (i ? " > " : "") + Fmt(rows[i].valid.logloss, 5);
      if (i > 0) {
        check.Expect(rows[i].valid.logloss <= rows[i - 1].valid.logloss + 0.002,
                     "seed " + std::to_string(seed) + ": " + rows[i].variant + " regressed to " +
                         Fmt(rows[i].valid.logloss));
      }
    }
    check.Note("seed " + std::to_string(seed) + " [" + losses + "]");
  }
  return check.Result();
}

// ---------------------------------------------------------------- 10

std::map<std::string, std::string> Artifacts(const fs::path& out) {
  std::map<std::string, std::string> files;
  for (const char* name : {"report.json", "valid_predictions.csv", "test_predictions.csv"}) {
    const fs::path p = out / name;
    files[name] = fs::exists(p) ? rlt::ReadFile(p.string()) : std::string();
  }
  return files;
}

int Shell(const std::string& command) {
  std::cout.flush();
  return std::system(command.c_str());
}

Outcome Determinism(const fs::path& work, const std::string& rlt_path) {
  Check check;
  const fs::path dir = work / "determinism";
  const std::uint64_t seed = 2023;
  fs::create_directories(dir);
  if (!rlt_path.empty()) {
    check.Expect(Shell("\"" + rlt_path + "\" synth --seed " + std::to_string(seed) + " --out-dir \"" + dir.string() +
                       "\" > /dev/null") == 0,
                 "rlt synth failed");
  } else {
    WriteBenchmark(dir, seed);
  }
  rlt::WriteFile((dir / "config.json").string(), BenchmarkConfig(dir, seed).dump(2) + "\n");

  std::vector<std::map<std::string, std::string>> runs;
  for (const char* threads : {"1", "4", "1"}) {
    fs::remove_all(dir / "out");
    if (!rlt_path.empty()) {
      const int rc = Shell("RLT_RUN_THREADS=" + std::string(threads) + " \"" + rlt_path + "\" run --config \"" +
                           (dir / "config.json").string() + "\" > /dev/null");
      check.Expect(rc == 0, std::string("rlt run failed with threads=") + threads);
    } else {
      nlohmann::json json = BenchmarkConfig(dir, seed);
      json["run"]["threads"] = std::stoi(threads);
      rlt::RunPipeline(rlt::PipelineConfig::FromJson(json));
    }
    runs.push_back(Artifacts(dir / "out"));
  }
  for (const auto& [name, bytes] : runs[0]) {
    check.Expect(!bytes.empty(), name + " missing");
    for (std::size_t i = 1; i < runs.size(); ++i) {
      check.Expect(runs[i].at(name) == bytes, name + " differs between run 1 and run " + std::to_string(i + 1));
    }
  }
  check.Note(std::string(rlt_path.empty() ? "in-process" : "cli") + " runs at threads 1, 4, 1");
  return check.Result();
}

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::string rlt_path;
  fs::path work = fs::temp_directory_path() / "rlt_acceptance";
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--rlt" && i + 1 < argc) {
      rlt_path = argv[++i];
    } else if (arg == "--work" && i + 1 < argc) {
      work = argv[++i];
    } else {
      selected.insert(std::atoi(arg.c_str()));
    }
  }
  fs::create_directories(work);

  const std::vector<Criterion> criteria = {
      {1, "NCE identity", 1, NceIdentity},
      {2, "AUC oracle equivalence", 30, AucOracle},
      {3, "gradient checks", 5, GradientChecks},
      {4, "GBDT learnability", 60, GbdtLearnability},
      {5, "early stopping contract", 60, EarlyStopping},
      {6, "adversarial detection", 120, AdversarialDetection},
      {7, "denoiser recovery", 10, DenoiserRecovery},
      {8, "encoder leakage suite", 30, EncoderLeakage},
      {9, "ablation direction", 600, [&] { return AblationDirection(work); }},
      {10, "determinism", 600, [&] { return Determinism(work, rlt_path); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds >= c.limit_seconds) {
      outcome.pass = false;
      outcome.detail += "; runtime over the " + Fmt(c.limit_seconds) + " s limit";
    }
    if (!outcome.pass) ++failed;
    std::printf("%s  %2d %-26s %8.2fs  %s\n", outcome.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), seconds,
                outcome.detail.c_str());
    std::fflush(stdout);
  }
  fs::remove_all(work);
  return failed == 0 ? 0 : 1;
}
