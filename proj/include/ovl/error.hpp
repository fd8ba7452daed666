// Copyright 2026 The ovlsgd Authors. All Rights Reserved.
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
// =============================================================================
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ovl {

/// Invalid or inconsistent configuration. Raised before any simulation work.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated a precondition of a library call (e.g. empty input).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A vector picked up a NaN/Inf.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A simulated run blew up. Carries the round in which the guard tripped.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::int64_t round, const std::string& what)
      : std::runtime_error("diverged in round " + std::to_string(round) + ": " + what),
        round_(round) {}
  std::int64_t round() const noexcept { return round_; }

 private:
  std::int64_t round_;
};

}  // namespace ovl
