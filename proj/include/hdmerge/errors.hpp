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

#ifndef HDMERGE__ERRORS_HPP_
#define HDMERGE__ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hdmerge
{

/// Malformed input text (XML, CSV cell, config line). Carries the 1-based line when known.
class ParseError : public std::runtime_error
{
public:
  ParseError(const std::string & what, std::size_t line = 0)
  : std::runtime_error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
    line_(line)
  {
  }
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

/// Well-formed input whose content violates a structural invariant (dangling id, frame gap, ...).
class IntegrityError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Required CSV column missing.
class SchemaError : public std::runtime_error
{
public:
  explicit SchemaError(const std::string & column)
  : std::runtime_error("missing mandatory column '" + column + "'"), column_(column)
  {
  }
  const std::string & column() const { return column_; }

private:
  std::string column_;
};

class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside an operation's domain (negative gap, coincident points, ...).
class DomainError : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

struct Diagnostic
{
  std::string stage;
  std::string code;
  std::string message;
};

/// Ordered sink for non-fatal warnings. Not thread-safe; parallel stages keep one per work item
/// and merge in input order.
class Diagnostics
{
public:
  void warn(std::string stage, std::string code, std::string message)
  {
    items_.push_back({std::move(stage), std::move(code), std::move(message)});
  }
  void append(const Diagnostics & other)
  {
    items_.insert(items_.end(), other.items_.begin(), other.items_.end());
  }
  const std::vector<Diagnostic> & items() const { return items_; }
  bool empty() const { return items_.empty(); }
  std::size_t size() const { return items_.size(); }

private:
  std::vector<Diagnostic> items_;
};

}  // namespace hdmerge

#endif  // HDMERGE__ERRORS_HPP_
