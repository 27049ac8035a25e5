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

#include "hdmerge/csv.hpp"

#include "hdmerge/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace hdmerge::csv
{

Reader::Reader(std::string text) : text_(std::move(text))
{
  // UTF-8 byte-order mark
  if (text_.size() >= 3 && text_.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    pos_ = 3;
  }
}

Reader Reader::from_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return Reader(buf.str());
}

const std::vector<std::string> & Reader::read_header()
{
  std::vector<std::string_view> fields;
  if (!next(fields)) {
    throw ParseError("empty CSV: no header row", 1);
  }
  header_.clear();
  index_.clear();
  for (std::size_t i = 0; i < fields.size(); ++i) {
    header_.emplace_back(fields[i]);
    index_.emplace(header_.back(), i);
  }
  return header_;
}

std::optional<std::size_t> Reader::column(std::string_view name) const
{
  const auto it = index_.find(name);
  if (it == index_.end()) {
    return std::nullopt;
  }
  return it->second;
}

std::size_t Reader::require(std::string_view name) const
{
  const auto idx = column(name);
  if (!idx) {
    throw SchemaError(std::string(name));
  }
  return *idx;
}

bool Reader::next(std::vector<std::string_view> & fields)
{
  while (pos_ < text_.size()) {
    if (!parse_row(fields)) {
      return false;
    }
    if (!(fields.size() == 1 && fields[0].empty())) {
      return true;
    }
  }
  return false;
}

bool Reader::parse_row(std::vector<std::string_view> & fields)
{
  fields.clear();
  scratch_.clear();
  row_line_ = line_;
  const std::size_t n = text_.size();
  if (pos_ >= n) {
    return false;
  }
  while (true) {
    if (pos_ < n && text_[pos_] == '"') {
      ++pos_;
      const std::size_t start = pos_;
      bool escaped = false;
      while (true) {
        if (pos_ >= n) {
          throw ParseError("unterminated quoted field", row_line_);
        }
        if (text_[pos_] == '"') {
          if (pos_ + 1 < n && text_[pos_ + 1] == '"') {
            escaped = true;
            pos_ += 2;
            continue;
          }
          break;
        }
        if (text_[pos_] == '\n') {
          ++line_;
        }
        ++pos_;
      }
      std::string_view raw(text_.data() + start, pos_ - start);
      ++pos_;  // closing quote
      if (escaped) {
        std::string unescaped;
        for (std::size_t i = 0; i < raw.size(); ++i) {
          unescaped.push_back(raw[i]);
          if (raw[i] == '"') {
            ++i;
          }
        }
        scratch_.push_back(std::move(unescaped));
        fields.emplace_back(scratch_.back());
      } else {
        fields.push_back(raw);
      }
      if (pos_ < n && text_[pos_] != ',' && text_[pos_] != '\n' && text_[pos_] != '\r') {
        throw ParseError("unexpected character after quoted field", row_line_);
      }
    } else {
      const std::size_t start = pos_;
      while (pos_ < n && text_[pos_] != ',' && text_[pos_] != '\n' && text_[pos_] != '\r') {
        ++pos_;
      }
      fields.emplace_back(text_.data() + start, pos_ - start);
    }
    if (pos_ >= n) {
      return true;
    }
    if (text_[pos_] == ',') {
      ++pos_;
      continue;
    }
    if (text_[pos_] == '\r') {
      ++pos_;
    }
    if (pos_ < n && text_[pos_] == '\n') {
      ++pos_;
      ++line_;
    }
    return true;
  }
}

std::string format_double(double value)
{
  if (std::isnan(value)) {
    return {};
  }
  if (std::isinf(value)) {
    return value > 0 ? "inf" : "-inf";
  }
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string format_int(std::int64_t value) { return std::to_string(value); }

double parse_double(std::string_view cell, std::size_t line)
{
  if (cell.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  if (cell == "inf" || cell == "+inf") {
    return std::numeric_limits<double>::infinity();
  }
  if (cell == "-inf") {
    return -std::numeric_limits<double>::infinity();
  }
  const char * begin = cell.data();
  const char * end = begin + cell.size();
  if (*begin == '+') {
    ++begin;
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError("invalid number '" + std::string(cell) + "'", line);
  }
  return value;
}

std::int64_t parse_int(std::string_view cell, std::size_t line)
{
  std::int64_t value = 0;
  const char * begin = cell.data();
  const char * end = begin + cell.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec == std::errc{} && ptr == end) {
    return value;
  }
  // Integral values written as floats ("12.0").
  const double d = parse_double(cell, line);
  if (std::isfinite(d) && d == std::floor(d)) {
    return static_cast<std::int64_t>(d);
  }
  throw ParseError("invalid integer '" + std::string(cell) + "'", line);
}

std::optional<std::int64_t> parse_optional_int(std::string_view cell, std::size_t line)
{
  if (cell.empty()) {
    return std::nullopt;
  }
  return parse_int(cell, line);
}

std::string quote_if_needed(std::string_view field)
{
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') {
      out.push_back('"');
    }
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void Writer::row(const std::vector<std::string> & fields)
{
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) {
      out_ << ',';
    }
    out_ << quote_if_needed(fields[i]);
  }
  out_ << '\n';
}

}  // namespace hdmerge::csv
