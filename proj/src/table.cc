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

#include "rlt/table.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "rlt/common.h"

namespace rlt {
namespace {

constexpr std::pair<ColumnRole, std::string_view> kRoleNames[] = {
    {ColumnRole::kRowId, "row_id"},
    {ColumnRole::kDay, "day"},
    {ColumnRole::kCategorical, "categorical"},
    {ColumnRole::kContinuous, "continuous"},
    {ColumnRole::kBinary, "binary"},
    {ColumnRole::kLabelClick, "label_click"},
    {ColumnRole::kLabelInstall, "label_install"},
};

void RequireRole(const Column& column, std::initializer_list<ColumnRole> roles,
                 std::string_view what) {
  if (std::find(roles.begin(), roles.end(), column.role()) == roles.end()) {
    throw Error("column '" + column.name() + "' (" +
                std::string(RoleName(column.role())) + ") has no " +
                std::string(what));
  }
}

template <typename T>
std::vector<T> GatherVector(const std::vector<T>& source,
                            std::span<const std::size_t> rows) {
  std::vector<T> out;
  out.reserve(rows.size());
  for (const std::size_t row : rows) out.push_back(source.at(row));
  return out;
}

bool SameBits(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isnan(a[i]) != std::isnan(b[i])) return false;
    if (!std::isnan(a[i]) && a[i] != b[i]) return false;
  }
  return true;
}

}  // namespace

std::string_view RoleName(ColumnRole role) {
  for (const auto& [r, name] : kRoleNames) {
    if (r == role) return name;
  }
  return "unknown";
}

ColumnRole ParseRole(std::string_view name) {
  for (const auto& [role, role_name] : kRoleNames) {
    if (role_name == name) return role;
  }
  throw Error("unknown column role '" + std::string(name) + "'");
}

bool IsFeatureRole(ColumnRole role) {
  return role == ColumnRole::kCategorical || role == ColumnRole::kContinuous ||
         role == ColumnRole::kBinary;
}

bool IsLabelRole(ColumnRole role) {
  return role == ColumnRole::kLabelClick || role == ColumnRole::kLabelInstall;
}

// ---------------------------------------------------------------- Schema

Schema::Schema(std::vector<ColumnSpec> columns, char delimiter, bool has_header)
    : columns_(std::move(columns)),
      delimiter_(delimiter),
      has_header_(has_header) {
  std::set<std::string_view> seen;
  for (const auto& spec : columns_) {
    if (spec.name.empty()) throw Error("schema has a column with an empty name");
    if (!seen.insert(spec.name).second) {
      throw Error("duplicate column name '" + spec.name + "' in schema");
    }
  }
}

std::optional<std::size_t> Schema::Find(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Schema::IndexOf(std::string_view name) const {
  if (auto index = Find(name)) return *index;
  throw Error("no column named '" + std::string(name) + "'");
}

void Schema::ValidateForTraining() const {
  int days = 0, installs = 0, clicks = 0;
  for (const auto& spec : columns_) {
    days += spec.role == ColumnRole::kDay;
    installs += spec.role == ColumnRole::kLabelInstall;
    clicks += spec.role == ColumnRole::kLabelClick;
  }
  if (days != 1) throw Error("schema must have exactly one day column");
  if (installs != 1) {
    throw Error("schema must have exactly one label_install column");
  }
  if (clicks > 1) throw Error("schema has more than one label_click column");
}

nlohmann::json Schema::ToJson() const {
  nlohmann::json columns = nlohmann::json::array();
  for (const auto& spec : columns_) {
    columns.push_back({{"name", spec.name}, {"role", RoleName(spec.role)}});
  }
  return {{"delimiter", std::string(1, delimiter_)},
          {"header", has_header_},
          {"columns", std::move(columns)}};
}

Schema Schema::FromJson(const nlohmann::json& json) {
  try {
    char delimiter = '\t';
    if (json.contains("delimiter")) {
      const auto text = json.at("delimiter").get<std::string>();
      if (text.size() != 1) throw Error("schema delimiter must be one character");
      delimiter = text[0];
    }
    const bool header = json.value("header", true);
    std::vector<ColumnSpec> columns;
    for (const auto& entry : json.at("columns")) {
      if (entry.is_array()) {
        columns.push_back({entry.at(0).get<std::string>(),
                           ParseRole(entry.at(1).get<std::string>())});
      } else {
        columns.push_back({entry.at("name").get<std::string>(),
                           ParseRole(entry.at("role").get<std::string>())});
      }
    }
    return Schema(std::move(columns), delimiter, header);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("invalid schema document: ") + e.what());
  }
}

Schema Schema::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open schema file '" + path + "'");
  try {
    return FromJson(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("cannot parse schema file '" + path + "': " + e.what());
  }
}

// ---------------------------------------------------------------- Column

Column Column::Categorical(std::string name, std::vector<std::int32_t> codes,
                           std::shared_ptr<const Dictionary> dictionary) {
  if (!dictionary || dictionary->empty() || (*dictionary)[0] != kMissingToken) {
    throw Error("categorical column '" + name +
                "' needs a dictionary starting with " +
                std::string(kMissingToken));
  }
  const auto size = static_cast<std::int32_t>(dictionary->size());
  for (const auto code : codes) {
    if (code < 0 || code >= size) {
      throw Error("categorical column '" + name + "' has out-of-range code " +
                  std::to_string(code));
    }
  }
  Column column(std::move(name), ColumnRole::kCategorical);
  column.i32_ = std::move(codes);
  column.dictionary_ = std::move(dictionary);
  return column;
}

Column Column::Continuous(std::string name, std::vector<double> values) {
  Column column(std::move(name), ColumnRole::kContinuous);
  for (auto& v : values) {
    if (std::isnan(v)) v = std::numeric_limits<double>::quiet_NaN();
  }
  column.f64_ = std::move(values);
  return column;
}

Column Column::Binary(std::string name, std::vector<std::uint8_t> values,
                      ColumnRole role) {
  if (role != ColumnRole::kBinary && !IsLabelRole(role)) {
    throw Error("column '" + name + "': binary storage requires a binary or label role");
  }
  for (const auto v : values) {
    const bool ok = v == 0 || v == 1 || (role == ColumnRole::kBinary && v == kMissingBinary);
    if (!ok) {
      throw Error("column '" + name + "' has a value outside {0,1}" +
                  std::string(IsLabelRole(role) ? " (labels may not be missing)" : ""));
    }
  }
  Column column(std::move(name), role);
  column.u8_ = std::move(values);
  return column;
}

Column Column::Day(std::string name, std::vector<std::int32_t> days) {
  for (const auto d : days) {
    if (d < 0) throw Error("day column '" + name + "' has a negative day");
  }
  Column column(std::move(name), ColumnRole::kDay);
  column.i32_ = std::move(days);
  return column;
}

Column Column::RowId(std::string name, std::vector<std::int64_t> ids) {
  Column column(std::move(name), ColumnRole::kRowId);
  column.i64_ = std::move(ids);
  return column;
}

Column Column::FromTokens(std::string name, const std::vector<std::string>& tokens) {
  auto dictionary = std::make_shared<Dictionary>();
  dictionary->emplace_back(kMissingToken);
  std::unordered_map<std::string, std::int32_t> index{{std::string(kMissingToken), 0}};
  std::vector<std::int32_t> codes;
  codes.reserve(tokens.size());
  for (const auto& token : tokens) {
    if (token.empty()) {
      codes.push_back(0);
      continue;
    }
    auto [it, inserted] =
        index.emplace(token, static_cast<std::int32_t>(dictionary->size()));
    if (inserted) dictionary->push_back(token);
    codes.push_back(it->second);
  }
  return Categorical(std::move(name), std::move(codes), std::move(dictionary));
}

std::size_t Column::size() const {
  switch (role_) {
    case ColumnRole::kCategorical:
    case ColumnRole::kDay:
      return i32_.size();
    case ColumnRole::kContinuous:
      return f64_.size();
    case ColumnRole::kRowId:
      return i64_.size();
    default:
      return u8_.size();
  }
}

std::span<const std::int32_t> Column::codes() const {
  RequireRole(*this, {ColumnRole::kCategorical}, "categorical codes");
  return i32_;
}

const Dictionary& Column::dictionary() const {
  RequireRole(*this, {ColumnRole::kCategorical}, "dictionary");
  return *dictionary_;
}

std::span<const double> Column::values() const {
  RequireRole(*this, {ColumnRole::kContinuous}, "continuous values");
  return f64_;
}

std::span<const std::uint8_t> Column::flags() const {
  RequireRole(*this,
              {ColumnRole::kBinary, ColumnRole::kLabelClick, ColumnRole::kLabelInstall},
              "binary values");
  return u8_;
}

std::span<const std::int32_t> Column::days() const {
  RequireRole(*this, {ColumnRole::kDay}, "days");
  return i32_;
}

std::span<const std::int64_t> Column::ids() const {
  RequireRole(*this, {ColumnRole::kRowId}, "row ids");
  return i64_;
}

bool Column::IsMissing(std::size_t row) const {
  switch (role_) {
    case ColumnRole::kCategorical:
      return i32_.at(row) == 0;
    case ColumnRole::kContinuous:
      return std::isnan(f64_.at(row));
    case ColumnRole::kBinary:
      return u8_.at(row) == kMissingBinary;
    default:
      return false;
  }
}

double Column::NumericValue(std::size_t row) const {
  switch (role_) {
    case ColumnRole::kContinuous:
      return f64_.at(row);
    case ColumnRole::kBinary:
    case ColumnRole::kLabelClick:
    case ColumnRole::kLabelInstall:
      return u8_.at(row) == kMissingBinary ? std::numeric_limits<double>::quiet_NaN()
                                           : static_cast<double>(u8_.at(row));
    case ColumnRole::kDay:
      return static_cast<double>(i32_.at(row));
    default:
      throw Error("column '" + name_ + "' is not numeric");
  }
}

const std::string& Column::Token(std::size_t row) const {
  return dictionary().at(static_cast<std::size_t>(i32_.at(row)));
}

Column Column::Renamed(std::string name) const {
  Column copy = *this;
  copy.name_ = std::move(name);
  return copy;
}

Column Column::Gather(std::span<const std::size_t> rows) const {
  Column out(name_, role_);
  out.dictionary_ = dictionary_;
  if (!i32_.empty()) out.i32_ = GatherVector(i32_, rows);
  if (!i64_.empty()) out.i64_ = GatherVector(i64_, rows);
  if (!f64_.empty()) out.f64_ = GatherVector(f64_, rows);
  if (!u8_.empty()) out.u8_ = GatherVector(u8_, rows);
  return out;
}

bool Column::operator==(const Column& other) const {
  if (name_ != other.name_ || role_ != other.role_) return false;
  if (i32_ != other.i32_ || i64_ != other.i64_ || u8_ != other.u8_) return false;
  if (!SameBits(f64_, other.f64_)) return false;
  if (role_ == ColumnRole::kCategorical && *dictionary_ != *other.dictionary_) {
    return false;
  }
  return true;
}

// ---------------------------------------------------------------- Table

Table::Table(std::vector<std::shared_ptr<const Column>> columns, char delimiter,
             bool has_header)
    : columns_(std::move(columns)) {
  std::vector<ColumnSpec> specs;
  specs.reserve(columns_.size());
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    const auto& column = columns_[i];
    if (!column) throw Error("table column is null");
    if (i == 0) n_rows_ = column->size();
    if (column->size() != n_rows_) {
      throw Error("column '" + column->name() + "' has " +
                  std::to_string(column->size()) + " rows, expected " +
                  std::to_string(n_rows_));
    }
    specs.push_back({column->name(), column->role()});
  }
  schema_ = Schema(std::move(specs), delimiter, has_header);
}

Table Table::FromColumns(std::vector<Column> columns, char delimiter, bool has_header) {
  std::vector<std::shared_ptr<const Column>> shared;
  shared.reserve(columns.size());
  for (auto& column : columns) {
    shared.push_back(std::make_shared<const Column>(std::move(column)));
  }
  return Table(std::move(shared), delimiter, has_header);
}

const Column& Table::column(std::string_view name) const {
  return *columns_[schema_.IndexOf(name)];
}

const Column* Table::FindColumn(std::string_view name) const {
  const auto index = schema_.Find(name);
  return index ? columns_[*index].get() : nullptr;
}

const Column* Table::FindByRole(ColumnRole role) const {
  for (const auto& column : columns_) {
    if (column->role() == role) return column.get();
  }
  return nullptr;
}

const Column& Table::day_column() const {
  const Column* day = FindByRole(ColumnRole::kDay);
  if (day == nullptr) throw Error("table has no day column");
  return *day;
}

std::vector<std::string> Table::FeatureNames() const {
  std::vector<std::string> names;
  for (const auto& spec : schema_.columns()) {
    if (IsFeatureRole(spec.role)) names.push_back(spec.name);
  }
  return names;
}

std::pair<std::int32_t, std::int32_t> Table::DayRange() const {
  const auto days = day_column().days();
  if (days.empty()) throw Error("day range of an empty table is undefined");
  const auto [lo, hi] = std::minmax_element(days.begin(), days.end());
  return {*lo, *hi};
}

Table Table::SelectRows(std::span<const std::size_t> rows) const {
  std::vector<std::shared_ptr<const Column>> columns;
  columns.reserve(columns_.size());
  for (const auto& column : columns_) {
    columns.push_back(std::make_shared<const Column>(column->Gather(rows)));
  }
  Table out(std::move(columns), schema_.delimiter(), schema_.has_header());
  out.n_rows_ = rows.size();
  return out;
}

Table Table::WithColumn(Column column) const {
  if (schema_.Find(column.name())) {
    throw Error("table already has a column named '" + column.name() + "'");
  }
  auto columns = columns_;
  columns.push_back(std::make_shared<const Column>(std::move(column)));
  return Table(std::move(columns), schema_.delimiter(), schema_.has_header());
}

Table Table::ReplaceColumn(Column column) const {
  const std::size_t index = schema_.IndexOf(column.name());
  auto columns = columns_;
  columns[index] = std::make_shared<const Column>(std::move(column));
  return Table(std::move(columns), schema_.delimiter(), schema_.has_header());
}

Table Table::WithoutColumns(const std::set<std::string>& names) const {
  std::vector<std::shared_ptr<const Column>> columns;
  for (const auto& column : columns_) {
    if (!names.contains(column->name())) columns.push_back(column);
  }
  Table out(std::move(columns), schema_.delimiter(), schema_.has_header());
  out.n_rows_ = n_rows_;
  return out;
}

Table Table::Concat(const std::vector<Table>& parts) {
  if (parts.empty()) return Table();
  const Table& first = parts.front();
  for (const auto& part : parts) {
    if (part.schema().columns() != first.schema().columns()) {
      throw Error("cannot concatenate tables with different schemas");
    }
  }
  std::vector<Column> merged;
  for (std::size_t c = 0; c < first.n_cols(); ++c) {
    const Column& head = first.column(c);
    const std::string& name = head.name();
    switch (head.role()) {
      case ColumnRole::kCategorical: {
        bool shared = true;
        for (const auto& part : parts) {
          shared &= part.column(c).shared_dictionary() == head.shared_dictionary();
        }
        std::vector<std::int32_t> codes;
        if (shared) {
          for (const auto& part : parts) {
            const auto src = part.column(c).codes();
            codes.insert(codes.end(), src.begin(), src.end());
          }
          merged.push_back(Column::Categorical(name, std::move(codes),
                                               head.shared_dictionary()));
          break;
        }
        auto dictionary = std::make_shared<Dictionary>(head.dictionary());
        std::unordered_map<std::string, std::int32_t> index;
        for (std::size_t i = 0; i < dictionary->size(); ++i) {
          index.emplace((*dictionary)[i], static_cast<std::int32_t>(i));
        }
        for (const auto& part : parts) {
          const Column& col = part.column(c);
          std::vector<std::int32_t> remap(col.dictionary().size());
          for (std::size_t i = 0; i < remap.size(); ++i) {
            auto [it, inserted] = index.emplace(
                col.dictionary()[i], static_cast<std::int32_t>(dictionary->size()));
            if (inserted) dictionary->push_back(col.dictionary()[i]);
            remap[i] = it->second;
          }
          for (const auto code : col.codes()) codes.push_back(remap[code]);
        }
        merged.push_back(Column::Categorical(name, std::move(codes), std::move(dictionary)));
        break;
      }
      case ColumnRole::kContinuous: {
        std::vector<double> values;
        for (const auto& part : parts) {
          const auto src = part.column(c).values();
          values.insert(values.end(), src.begin(), src.end());
        }
        merged.push_back(Column::Continuous(name, std::move(values)));
        break;
      }
      case ColumnRole::kDay: {
        std::vector<std::int32_t> days;
        for (const auto& part : parts) {
          const auto src = part.column(c).days();
          days.insert(days.end(), src.begin(), src.end());
        }
        merged.push_back(Column::Day(name, std::move(days)));
        break;
      }
      case ColumnRole::kRowId: {
        std::vector<std::int64_t> ids;
        for (const auto& part : parts) {
          const auto src = part.column(c).ids();
          ids.insert(ids.end(), src.begin(), src.end());
        }
        merged.push_back(Column::RowId(name, std::move(ids)));
        break;
      }
      default: {
        std::vector<std::uint8_t> flags;
        for (const auto& part : parts) {
          const auto src = part.column(c).flags();
          flags.insert(flags.end(), src.begin(), src.end());
        }
        merged.push_back(Column::Binary(name, std::move(flags), head.role()));
        break;
      }
    }
  }
  return FromColumns(std::move(merged), first.schema().delimiter(),
                     first.schema().has_header());
}

bool Table::operator==(const Table& other) const {
  if (schema_ != other.schema_ || n_rows_ != other.n_rows_) return false;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (!(*columns_[i] == *other.columns_[i])) return false;
  }
  return true;
}

// ---------------------------------------------------------------- Split

void SplitPlan::Validate() const {
  if (train_days.contains(valid_day)) {
    throw Error("split plan: validation day " + std::to_string(valid_day) +
                " is also a train day");
  }
  if (!train_days.empty() && *train_days.rbegin() >= valid_day) {
    throw Error("split plan: every train day must precede the validation day");
  }
  if (test_day && *test_day <= valid_day) {
    throw Error("split plan: test day must come after the validation day");
  }
}

SplitResult Split(const Table& table, const SplitPlan& plan) {
  plan.Validate();
  const auto days = table.day_column().days();
  std::vector<std::size_t> train, valid, test;
  for (std::size_t row = 0; row < days.size(); ++row) {
    const auto day = days[row];
    if (day == plan.valid_day) {
      valid.push_back(row);
    } else if (plan.test_day && day == *plan.test_day) {
      test.push_back(row);
    } else if (plan.train_days.contains(day)) {
      train.push_back(row);
    }
  }
  if (valid.empty()) {
    throw Error("split plan: validation day " + std::to_string(plan.valid_day) +
                " selects zero rows");
  }
  return {table.SelectRows(train), table.SelectRows(valid), table.SelectRows(test)};
}

}  // namespace rlt
