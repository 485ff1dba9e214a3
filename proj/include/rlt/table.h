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

// Column-major, immutable tabular dataset.
//
// A Table owns a Schema and one Column per schema entry. Columns are shared
// between tables through shared_ptr<const Column>, so projections such as
// dropping or appending columns do not copy data. Row subsets (SelectRows)
// copy the selected cells but keep sharing categorical dictionaries, which
// lets downstream code detect "same dictionary" by pointer comparison.
//
// Missing-value conventions:
//   - Continuous: NaN.
//   - Categorical: code 0, whose dictionary token is "__MISSING__".
//   - Binary features: kMissingBinary. Labels may not be missing.
//   - Day and row id: never missing.

#ifndef RLT_TABLE_H_
#define RLT_TABLE_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace rlt {

enum class ColumnRole : std::uint8_t {
  kRowId = 0,
  kDay = 1,
  kCategorical = 2,
  kContinuous = 3,
  kBinary = 4,
  kLabelClick = 5,
  kLabelInstall = 6,
};

std::string_view RoleName(ColumnRole role);
ColumnRole ParseRole(std::string_view name);

// Categorical, continuous and binary columns are model features.
bool IsFeatureRole(ColumnRole role);
bool IsLabelRole(ColumnRole role);

inline constexpr std::string_view kMissingToken = "__MISSING__";
inline constexpr std::uint8_t kMissingBinary = 0xFF;

struct ColumnSpec {
  std::string name;
  ColumnRole role;

  bool operator==(const ColumnSpec&) const = default;
};

class Schema {
 public:
  Schema() = default;
  // Throws rlt::Error on duplicate column names.
  explicit Schema(std::vector<ColumnSpec> columns, char delimiter = '\t',
                  bool has_header = true);

  const std::vector<ColumnSpec>& columns() const { return columns_; }
  std::size_t size() const { return columns_.size(); }
  char delimiter() const { return delimiter_; }
  bool has_header() const { return has_header_; }

  std::optional<std::size_t> Find(std::string_view name) const;
  // Throws when the column does not exist.
  std::size_t IndexOf(std::string_view name) const;

  // Exactly one day column and one install label; at most one click label.
  void ValidateForTraining() const;

  // {"delimiter": "\t", "header": true,
  //  "columns": [{"name": "f_1", "role": "day"}, ...]}
  nlohmann::json ToJson() const;
  static Schema FromJson(const nlohmann::json& json);
  static Schema Load(const std::string& path);

  bool operator==(const Schema&) const = default;

 private:
  std::vector<ColumnSpec> columns_;
  char delimiter_ = '\t';
  bool has_header_ = true;
};

using Dictionary = std::vector<std::string>;

class Column {
 public:
  // `dictionary[0]` must be kMissingToken; codes must index the dictionary.
  static Column Categorical(std::string name, std::vector<std::int32_t> codes,
                            std::shared_ptr<const Dictionary> dictionary);
  static Column Continuous(std::string name, std::vector<double> values);
  // Binary features and labels. Labels reject kMissingBinary.
  static Column Binary(std::string name, std::vector<std::uint8_t> values,
                       ColumnRole role = ColumnRole::kBinary);
  static Column Day(std::string name, std::vector<std::int32_t> days);
  static Column RowId(std::string name, std::vector<std::int64_t> ids);

  // Builds a categorical column from raw tokens, empty token = missing.
  static Column FromTokens(std::string name,
                           const std::vector<std::string>& tokens);

  const std::string& name() const { return name_; }
  ColumnRole role() const { return role_; }
  std::size_t size() const;

  std::span<const std::int32_t> codes() const;
  const Dictionary& dictionary() const;
  const std::shared_ptr<const Dictionary>& shared_dictionary() const {
    return dictionary_;
  }
  std::span<const double> values() const;
  std::span<const std::uint8_t> flags() const;
  std::span<const std::int32_t> days() const;
  std::span<const std::int64_t> ids() const;

  bool IsMissing(std::size_t row) const;
  // Continuous and binary columns as doubles, NaN when missing.
  double NumericValue(std::size_t row) const;
  // Token of a categorical cell.
  const std::string& Token(std::size_t row) const;

  Column Renamed(std::string name) const;
  Column Gather(std::span<const std::size_t> rows) const;

  bool operator==(const Column& other) const;

 private:
  Column(std::string name, ColumnRole role) : name_(std::move(name)), role_(role) {}

  std::string name_;
  ColumnRole role_;
  // Codes (categorical) or days.
  std::vector<std::int32_t> i32_;
  std::vector<std::int64_t> i64_;
  std::vector<double> f64_;
  std::vector<std::uint8_t> u8_;
  std::shared_ptr<const Dictionary> dictionary_;
};

class Table {
 public:
  Table() = default;
  // Validates equal lengths and unique names. Schema is derived from the
  // columns; `delimiter` and `has_header` are carried for CSV output.
  explicit Table(std::vector<std::shared_ptr<const Column>> columns,
                 char delimiter = '\t', bool has_header = true);
  static Table FromColumns(std::vector<Column> columns, char delimiter = '\t',
                           bool has_header = true);

  const Schema& schema() const { return schema_; }
  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return columns_.size(); }
  bool empty() const { return n_rows_ == 0; }

  const Column& column(std::size_t index) const { return *columns_.at(index); }
  const Column& column(std::string_view name) const;
  const std::shared_ptr<const Column>& shared_column(std::size_t index) const {
    return columns_.at(index);
  }
  const Column* FindColumn(std::string_view name) const;
  // First column with the given role, or nullptr.
  const Column* FindByRole(ColumnRole role) const;
  const Column& day_column() const;

  // Names of categorical/continuous/binary columns, in schema order.
  std::vector<std::string> FeatureNames() const;
  // Inclusive [min, max] of the day column. Throws on an empty table.
  std::pair<std::int32_t, std::int32_t> DayRange() const;

  Table SelectRows(std::span<const std::size_t> rows) const;
  // Appends a column; throws if the name already exists.
  Table WithColumn(Column column) const;
  // Replaces the column with the same name in place.
  Table ReplaceColumn(Column column) const;
  Table WithoutColumns(const std::set<std::string>& names) const;
  // Concatenates rows of tables with identical schemas. Categorical columns
  // are re-coded onto a merged dictionary unless they already share one.
  static Table Concat(const std::vector<Table>& parts);

  bool operator==(const Table& other) const;

 private:
  Schema schema_;
  std::size_t n_rows_ = 0;
  std::vector<std::shared_ptr<const Column>> columns_;
};

struct SplitPlan {
  std::set<std::int32_t> train_days;
  std::int32_t valid_day = 0;
  std::optional<std::int32_t> test_day;

  // valid_day not in train_days, all train days < valid_day < test_day.
  void Validate() const;
};

struct SplitResult {
  Table train;
  Table valid;
  Table test;  // Empty when the plan has no test day.
};

// Partitions rows by day, preserving relative order. Rows whose day is not
// covered by the plan are dropped. Throws when the validation day has no
// rows.
SplitResult Split(const Table& table, const SplitPlan& plan);

// Ingests one or more delimited files into a single table; rows appear in
// file order. Dictionaries span all files so that codes agree between, for
// example, a train and a test file.
Table IngestCsv(const std::vector<std::string>& paths, const Schema& schema);
Table IngestCsv(const std::string& path, const Schema& schema);
// Same, from in-memory text (one entry per "file").
Table ParseCsv(const std::vector<std::string>& contents, const Schema& schema);

// Writes `table` as delimited text per its schema (header row if enabled).
void WriteCsv(const Table& table, const std::string& path);

// Binary cache: magic "RLT1", little-endian, length-prefixed header followed
// by one length-prefixed block per column.
void SaveBinary(const Table& table, const std::string& path);
Table LoadBinary(const std::string& path);
std::string SerializeBinary(const Table& table);
Table DeserializeBinary(std::string_view bytes);

// Formats a double so that parsing it back yields the same value.
std::string FormatDouble(double value);

}  // namespace rlt

#endif  // RLT_TABLE_H_
