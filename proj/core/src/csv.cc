// Copyright 2026 The nudgelab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nudgelab/csv.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <system_error>

#include "nudgelab/common.h"

namespace nudgelab::csv {

std::string FormatDouble(double value) {
  if (value == 0.0) return "0";  // folds -0
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw DataError("cannot format floating-point value");
  return std::string(buf, ptr);
}

std::string FormatFixed(double value, int decimals) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(decimals) << value;
  std::string s = os.str();
  if (s.starts_with('-') && s.find_first_not_of("-0.") == std::string::npos) {
    s.erase(0, 1);
  }
  return s;
}

double ParseDouble(std::string_view field, std::string_view what) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value)) {
    throw DataError("invalid number '" + std::string(field) + "' for " + std::string(what));
  }
  return value;
}

std::int64_t ParseInt(std::string_view field, std::string_view what) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw DataError("invalid integer '" + std::string(field) + "' for " + std::string(what));
  }
  return value;
}

std::vector<std::string> SplitRecord(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (quoted) throw DataError("unterminated quoted field");
  fields.push_back(std::move(current));
  return fields;
}

std::string QuoteIfNeeded(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

Table Table::Read(const std::filesystem::path& path,
                  const std::vector<std::string>& expected_header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return Parse(in, expected_header, path.string());
}

Table Table::Parse(std::istream& in, const std::vector<std::string>& expected_header,
                   std::string_view source_name) {
  Table table;
  table.source_ = std::string(source_name);
  std::string line;
  if (!std::getline(in, line)) throw DataError(table.source_ + ": missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  // Tolerate a UTF-8 byte order mark.
  if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
  if (SplitRecord(line) != expected_header) {
    std::string want;
    for (const auto& h : expected_header) want += (want.empty() ? "" : ",") + h;
    throw DataError(table.source_ + ": expected header '" + want + "'");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = SplitRecord(line);
    if (fields.size() != expected_header.size()) {
      throw DataError(table.source_ + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(expected_header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    table.rows_.push_back(std::move(fields));
  }
  return table;
}

void Writer::Row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << QuoteIfNeeded(fields[i]);
  }
  out_ << '\n';
}

std::ofstream OpenForWrite(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw DataError("cannot create directory " + path.parent_path().string());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

}  // namespace nudgelab::csv
