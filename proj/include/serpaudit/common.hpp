// Copyright 2026 The serpaudit Authors.
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

// Shared error types and small string helpers.

#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace serpaudit {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input record. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input that breaks a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Bad or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Caller passed a value outside an operation's precondition.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// A statistical test has no defined result for the given sample.
class DegenerateSample : public Error {
 public:
  using Error::Error;
};

// A document could not be scored (e.g. no sentences, provider failure).
class ScoringError : public Error {
 public:
  using Error::Error;
};

enum class Level { document, sentence };

inline std::string_view to_string(Level level) {
  return level == Level::document ? "document" : "sentence";
}

inline Level parse_level(std::string_view s) {
  if (s == "document" || s == "doc") return Level::document;
  if (s == "sentence" || s == "sent") return Level::sentence;
  throw ConfigError("unknown analysis level '" + std::string(s) + "'");
}

namespace detail {

inline bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

}  // namespace detail
}  // namespace serpaudit
