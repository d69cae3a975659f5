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

#ifndef NUDGELAB_CSV_H_
#define NUDGELAB_CSV_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace nudgelab::csv {

// Shortest decimal representation that parses back to the same double.
std::string FormatDouble(double value);
// Fixed-point formatting for human-facing tables.
std::string FormatFixed(double value, int decimals);

double ParseDouble(std::string_view field, std::string_view what);
std::int64_t ParseInt(std::string_view field, std::string_view what);

// Splits one CSV record. Supports double-quoted fields with "" escapes.
std::vector<std::string> SplitRecord(std::string_view line);
std::string QuoteIfNeeded(std::string_view field);

// Minimal table reader: validates the header against `expected` (exact
// column names, in order) and returns the data records.
class Table {
 public:
  static Table Read(const std::filesystem::path& path,
                    const std::vector<std::string>& expected_header);
  static Table Parse(std::istream& in, const std::vector<std::string>& expected_header,
                     std::string_view source_name);

  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::vector<std::vector<std::string>> rows_;
};

// Writes records joined by commas with a trailing '\n'.
class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void Row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
};

// Opens `path` for writing, creating parent directories; throws DataError.
std::ofstream OpenForWrite(const std::filesystem::path& path);

}  // namespace nudgelab::csv

#endif  // NUDGELAB_CSV_H_
