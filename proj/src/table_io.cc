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

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "rlt/common.h"
#include "rlt/table.h"

namespace rlt {
namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

constexpr char kMagic[4] = {'R', 'L', 'T', '1'};
constexpr std::uint64_t kCanonicalNaN = 0x7FF8000000000000ULL;

std::string LineError(std::size_t file_index, std::size_t line, std::string_view msg) {
  std::string out = "line " + std::to_string(line);
  if (file_index > 0) out = "file #" + std::to_string(file_index + 1) + ", " + out;
  return out + ": " + std::string(msg);
}

bool ParseDouble(std::string_view token, double& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto result = std::from_chars(token.data(), token.data() + token.size(), out);
  return result.ec == std::errc() && result.ptr == token.data() + token.size();
}

template <typename Int>
bool ParseInt(std::string_view token, Int& out) {
  const auto result = std::from_chars(token.data(), token.data() + token.size(), out);
  return result.ec == std::errc() && result.ptr == token.data() + token.size();
}

// Accepts "0"/"1" and their float spellings ("1.0").
bool ParseFlag(std::string_view token, std::uint8_t& out) {
  double v;
  if (!ParseDouble(token, v) || (v != 0.0 && v != 1.0)) return false;
  out = static_cast<std::uint8_t>(v);
  return true;
}

// Accumulates one column across all ingested files.
struct ColumnBuilder {
  ColumnSpec spec;
  std::vector<std::int32_t> i32;
  std::vector<std::int64_t> i64;
  std::vector<double> f64;
  std::vector<std::uint8_t> u8;
  std::shared_ptr<Dictionary> dictionary;
  std::unordered_map<std::string, std::int32_t> index;

  explicit ColumnBuilder(ColumnSpec s) : spec(std::move(s)) {
    if (spec.role == ColumnRole::kCategorical) {
      dictionary = std::make_shared<Dictionary>();
      dictionary->emplace_back(kMissingToken);
      index.emplace(std::string(kMissingToken), 0);
    }
  }

  // Returns an error message, or empty on success.
  std::string Add(std::string_view token) {
    switch (spec.role) {
      case ColumnRole::kCategorical: {
        if (token.empty()) {
          i32.push_back(0);
          return {};
        }
        auto [it, inserted] = index.emplace(
            std::string(token), static_cast<std::int32_t>(dictionary->size()));
        if (inserted) dictionary->emplace_back(token);
        i32.push_back(it->second);
        return {};
      }
      case ColumnRole::kContinuous: {
        double v;
        if (token.empty() || token == "NaN") {
          f64.push_back(std::numeric_limits<double>::quiet_NaN());
        } else if (ParseDouble(token, v)) {
          f64.push_back(v);
        } else {
          return "non-numeric value '" + std::string(token) + "' in continuous column '" +
                 spec.name + "'";
        }
        return {};
      }
      case ColumnRole::kDay: {
        std::int32_t d;
        if (!ParseInt(token, d) || d < 0) {
          return "invalid day '" + std::string(token) + "' in column '" + spec.name + "'";
        }
        i32.push_back(d);
        return {};
      }
      case ColumnRole::kRowId: {
        std::int64_t id;
        if (!ParseInt(token, id)) {
          return "invalid row id '" + std::string(token) + "' in column '" + spec.name +
                 "'";
        }
        i64.push_back(id);
        return {};
      }
      case ColumnRole::kBinary: {
        std::uint8_t flag;
        if (token.empty() || token == "NaN") {
          u8.push_back(kMissingBinary);
        } else if (ParseFlag(token, flag)) {
          u8.push_back(flag);
        } else {
          return "non-binary value '" + std::string(token) + "' in column '" + spec.name +
                 "'";
        }
        return {};
      }
      case ColumnRole::kLabelClick:
      case ColumnRole::kLabelInstall: {
        std::uint8_t flag;
        if (token.empty() || token == "NaN") {
          return "missing label value in column '" + spec.name + "'";
        }
        if (!ParseFlag(token, flag)) {
          return "non-binary label '" + std::string(token) + "' in column '" + spec.name +
                 "'";
        }
        u8.push_back(flag);
        return {};
      }
    }
    return "unsupported role";
  }

  Column Build() && {
    switch (spec.role) {
      case ColumnRole::kCategorical:
        return Column::Categorical(spec.name, std::move(i32), std::move(dictionary));
      case ColumnRole::kContinuous:
        return Column::Continuous(spec.name, std::move(f64));
      case ColumnRole::kDay:
        return Column::Day(spec.name, std::move(i32));
      case ColumnRole::kRowId:
        return Column::RowId(spec.name, std::move(i64));
      default:
        return Column::Binary(spec.name, std::move(u8), spec.role);
    }
  }
};

// ---------------------------------------------------------- binary helpers

class ByteWriter {
 public:
  template <typename T>
  void Put(T value) {
    static_assert(std::is_integral_v<T>);
    using U = std::make_unsigned_t<T>;
    auto bits = static_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<char>(bits & 0xFF));
      if constexpr (sizeof(T) > 1) bits >>= 8;
    }
  }
  void PutDouble(double value) {
    Put(std::isnan(value) ? kCanonicalNaN : std::bit_cast<std::uint64_t>(value));
  }
  void PutString(std::string_view text) {
    Put(static_cast<std::uint32_t>(text.size()));
    out_.append(text);
  }
  void PutBytes(std::string_view bytes) { out_.append(bytes); }
  std::string& bytes() { return out_; }

 private:
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T Get() {
    static_assert(std::is_integral_v<T>);
    Need(sizeof(T));
    using U = std::make_unsigned_t<T>;
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bits |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(bits);
  }
  double GetDouble() { return std::bit_cast<double>(Get<std::uint64_t>()); }
  std::string GetString() {
    const auto size = Get<std::uint32_t>();
    return std::string(GetBytes(size));
  }
  std::string_view GetBytes(std::size_t size) {
    Need(size);
    auto out = bytes_.substr(pos_, size);
    pos_ += size;
    return out;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void Need(std::size_t size) const {
    if (bytes_.size() - pos_ < size) throw Error("binary table is truncated");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::string EncodeColumn(const Column& column) {
  ByteWriter w;
  switch (column.role()) {
    case ColumnRole::kCategorical:
      w.Put(static_cast<std::uint32_t>(column.dictionary().size()));
      for (const auto& token : column.dictionary()) w.PutString(token);
      for (const auto code : column.codes()) w.Put(code);
      break;
    case ColumnRole::kContinuous:
      for (const auto v : column.values()) w.PutDouble(v);
      break;
    case ColumnRole::kDay:
      for (const auto d : column.days()) w.Put(d);
      break;
    case ColumnRole::kRowId:
      for (const auto id : column.ids()) w.Put(id);
      break;
    default:
      for (const auto f : column.flags()) w.Put(f);
      break;
  }
  return std::move(w.bytes());
}

Column DecodeColumn(const ColumnSpec& spec, std::uint64_t n_rows, std::string_view block) {
  ByteReader r(block);
  Column column = [&] {
    switch (spec.role) {
      case ColumnRole::kCategorical: {
        auto dictionary = std::make_shared<Dictionary>(r.Get<std::uint32_t>());
        for (auto& token : *dictionary) token = r.GetString();
        std::vector<std::int32_t> codes(n_rows);
        for (auto& code : codes) code = r.Get<std::int32_t>();
        return Column::Categorical(spec.name, std::move(codes), std::move(dictionary));
      }
      case ColumnRole::kContinuous: {
        std::vector<double> values(n_rows);
        for (auto& v : values) v = r.GetDouble();
        return Column::Continuous(spec.name, std::move(values));
      }
      case ColumnRole::kDay: {
        std::vector<std::int32_t> days(n_rows);
        for (auto& d : days) d = r.Get<std::int32_t>();
        return Column::Day(spec.name, std::move(days));
      }
      case ColumnRole::kRowId: {
        std::vector<std::int64_t> ids(n_rows);
        for (auto& id : ids) id = r.Get<std::int64_t>();
        return Column::RowId(spec.name, std::move(ids));
      }
      default: {
        std::vector<std::uint8_t> flags(n_rows);
        for (auto& f : flags) f = r.Get<std::uint8_t>();
        return Column::Binary(spec.name, std::move(flags), spec.role);
      }
    }
  }();
  if (!r.done()) throw Error("column block for '" + spec.name + "' has trailing bytes");
  return column;
}

std::string CellText(const Column& column, std::size_t row) {
  switch (column.role()) {
    case ColumnRole::kCategorical:
      return column.codes()[row] == 0 ? std::string() : column.Token(row);
    case ColumnRole::kContinuous:
      return column.IsMissing(row) ? std::string() : FormatDouble(column.values()[row]);
    case ColumnRole::kDay:
      return std::to_string(column.days()[row]);
    case ColumnRole::kRowId:
      return std::to_string(column.ids()[row]);
    default:
      return column.flags()[row] == kMissingBinary
                 ? std::string()
                 : std::to_string(static_cast<int>(column.flags()[row]));
  }
}

}  // namespace

std::string FormatDouble(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

Table ParseCsv(const std::vector<std::string>& contents, const Schema& schema) {
  if (schema.size() == 0) throw Error("schema has no columns");
  std::vector<ColumnBuilder> builders;
  builders.reserve(schema.size());
  for (const auto& spec : schema.columns()) builders.emplace_back(spec);

  const char delimiter = schema.delimiter();
  std::vector<std::string_view> fields;
  for (std::size_t file = 0; file < contents.size(); ++file) {
    std::string_view text = contents[file];
    std::size_t line_number = 0;
    while (!text.empty()) {
      const auto newline = text.find('\n');
      std::string_view line = text.substr(0, newline);
      text = newline == std::string_view::npos ? std::string_view() : text.substr(newline + 1);
      ++line_number;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.empty()) continue;

      fields.clear();
      std::size_t start = 0;
      while (true) {
        const auto pos = line.find(delimiter, start);
        fields.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
      }
      if (fields.size() != schema.size()) {
        throw Error(LineError(file, line_number,
                              "expected " + std::to_string(schema.size()) +
                                  " fields, found " + std::to_string(fields.size())));
      }
      if (line_number == 1 && schema.has_header()) {
        for (std::size_t c = 0; c < fields.size(); ++c) {
          if (fields[c] != schema.columns()[c].name) {
            throw Error(LineError(file, 1,
                                  "header field '" + std::string(fields[c]) +
                                      "' does not match schema column '" +
                                      schema.columns()[c].name + "'"));
          }
        }
        continue;
      }
      for (std::size_t c = 0; c < fields.size(); ++c) {
        if (auto message = builders[c].Add(fields[c]); !message.empty()) {
          throw Error(LineError(file, line_number, message));
        }
      }
    }
  }

  std::vector<Column> columns;
  columns.reserve(builders.size());
  for (auto& builder : builders) columns.push_back(std::move(builder).Build());
  return Table::FromColumns(std::move(columns), schema.delimiter(), schema.has_header());
}

Table IngestCsv(const std::vector<std::string>& paths, const Schema& schema) {
  std::vector<std::string> contents;
  contents.reserve(paths.size());
  for (const auto& path : paths) contents.push_back(ReadFile(path));
  try {
    return ParseCsv(contents, schema);
  } catch (const Error& e) {
    if (paths.size() == 1) throw Error(paths.front() + ": " + e.what());
    throw;
  }
}

Table IngestCsv(const std::string& path, const Schema& schema) {
  return IngestCsv(std::vector<std::string>{path}, schema);
}

void WriteCsv(const Table& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  const char delimiter = table.schema().delimiter();
  if (table.schema().has_header()) {
    for (std::size_t c = 0; c < table.n_cols(); ++c) {
      if (c) out << delimiter;
      out << table.column(c).name();
    }
    out << '\n';
  }
  std::string line;
  for (std::size_t row = 0; row < table.n_rows(); ++row) {
    line.clear();
    for (std::size_t c = 0; c < table.n_cols(); ++c) {
      if (c) line.push_back(delimiter);
      line += CellText(table.column(c), row);
    }
    line.push_back('\n');
    out << line;
  }
  if (!out) throw Error("failed writing '" + path + "'");
}

std::string SerializeBinary(const Table& table) {
  ByteWriter header;
  header.Put(static_cast<std::uint8_t>(table.schema().delimiter()));
  header.Put(static_cast<std::uint8_t>(table.schema().has_header()));
  header.Put(static_cast<std::uint64_t>(table.n_rows()));
  header.Put(static_cast<std::uint32_t>(table.n_cols()));
  for (const auto& spec : table.schema().columns()) {
    header.Put(static_cast<std::uint8_t>(spec.role));
    header.PutString(spec.name);
  }

  ByteWriter w;
  w.PutBytes(std::string_view(kMagic, 4));
  w.Put(static_cast<std::uint32_t>(header.bytes().size()));
  w.PutBytes(header.bytes());
  for (std::size_t c = 0; c < table.n_cols(); ++c) {
    const std::string block = EncodeColumn(table.column(c));
    w.Put(static_cast<std::uint64_t>(block.size()));
    w.PutBytes(block);
  }
  return std::move(w.bytes());
}

Table DeserializeBinary(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error("not an RLT1 table (bad magic or unsupported version)");
  }
  ByteReader r(bytes.substr(4));
  const auto header_size = r.Get<std::uint32_t>();
  ByteReader h(r.GetBytes(header_size));
  const char delimiter = static_cast<char>(h.Get<std::uint8_t>());
  const bool has_header = h.Get<std::uint8_t>() != 0;
  const auto n_rows = h.Get<std::uint64_t>();
  const auto n_cols = h.Get<std::uint32_t>();
  std::vector<ColumnSpec> specs;
  for (std::uint32_t c = 0; c < n_cols; ++c) {
    const auto role = h.Get<std::uint8_t>();
    if (role > static_cast<std::uint8_t>(ColumnRole::kLabelInstall)) {
      throw Error("binary table has an unknown column role");
    }
    specs.push_back({h.GetString(), static_cast<ColumnRole>(role)});
  }
  if (!h.done()) throw Error("binary table header has trailing bytes");

  std::vector<Column> columns;
  for (const auto& spec : specs) {
    const auto block_size = r.Get<std::uint64_t>();
    columns.push_back(DecodeColumn(spec, n_rows, r.GetBytes(block_size)));
  }
  if (!r.done()) throw Error("binary table has trailing bytes");
  Table table = Table::FromColumns(std::move(columns), delimiter, has_header);
  if (n_cols > 0 && table.n_rows() != n_rows) throw Error("binary table row count mismatch");
  return table;
}

void SaveBinary(const Table& table, const std::string& path) {
  WriteFile(path, SerializeBinary(table));
}

Table LoadBinary(const std::string& path) {
  try {
    return DeserializeBinary(ReadFile(path));
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

}  // namespace rlt
