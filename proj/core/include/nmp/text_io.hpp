// Copyright 2026 The nmp-sdn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nmp::text {

/// Fixed-point rendering with '.' separator regardless of locale; never
/// produces "-0.00".
std::string fixed(double value, int decimals = 2);

std::string trim(std::string_view s);

/// Splits one CSV record. Double-quoted fields may contain commas and
/// doubled quotes. No multi-line fields.
std::vector<std::string> split_csv_line(std::string_view line);

/// CSV document with a mandatory header row. Blank lines and lines
/// starting with '#' are skipped.
struct CsvTable {
  std::vector<std::string> header;
  struct Row {
    std::size_t line = 0;  // 1-based line number in the source
    std::vector<std::string> fields;
  };
  std::vector<Row> rows;

  /// Column index; Error(kDecode) naming `source` when absent.
  std::size_t column(std::string_view name, const std::string& source) const;
  std::optional<std::size_t> find_column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text, const std::string& source);

/// Strict numeric parsing; errors name the source, line and field.
double parse_double(std::string_view s, const std::string& where);
long long parse_int(std::string_view s, const std::string& where);

/// Whole-file read; Error(kNotFound) when the file cannot be opened.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

/// True when the first non-space character is '[' or '{'.
bool looks_like_json(std::string_view text);

}  // namespace nmp::text
