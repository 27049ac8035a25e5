// Copyright 2026 The hdmerge Authors
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

#ifndef HDMERGE__CSV_HPP_
#define HDMERGE__CSV_HPP_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace hdmerge::csv
{

/// Streaming RFC-4180 reader over an in-memory buffer. Fields of the current row are views
/// into the buffer (or into row-local storage for quoted fields containing escaped quotes).
class Reader
{
public:
  explicit Reader(std::string text);
  static Reader from_file(const std::filesystem::path & path);

  /// Reads the header row. Must be called first.
  const std::vector<std::string> & read_header();
  const std::vector<std::string> & header() const { return header_; }

  /// Column index by name, if present.
  std::optional<std::size_t> column(std::string_view name) const;
  /// Column index by name; throws SchemaError naming the column when absent.
  std::size_t require(std::string_view name) const;

  /// Advances to the next non-empty row. Returns false at end of input.
  bool next(std::vector<std::string_view> & fields);

  /// 1-based line number where the current row started.
  std::size_t line() const { return row_line_; }

private:
  bool parse_row(std::vector<std::string_view> & fields);

  std::string text_;
  std::size_t pos_{0};
  std::size_t line_{1};
  std::size_t row_line_{0};
  std::vector<std::string> header_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::deque<std::string> scratch_;
};

/// Shortest round-trip representation; "" for NaN, "inf"/"-inf" for infinities.
std::string format_double(double value);
std::string format_int(std::int64_t value);

/// Parses a double cell ("" -> NaN). Throws ParseError on malformed input.
double parse_double(std::string_view cell, std::size_t line = 0);
std::int64_t parse_int(std::string_view cell, std::size_t line = 0);
std::optional<std::int64_t> parse_optional_int(std::string_view cell, std::size_t line = 0);

class Writer
{
public:
  explicit Writer(std::ostream & out) : out_(out) {}
  void row(const std::vector<std::string> & fields);

private:
  std::ostream & out_;
};

std::string quote_if_needed(std::string_view field);

}  // namespace hdmerge::csv

#endif  // HDMERGE__CSV_HPP_
