// Copyright 2026 The seqmeas Authors
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

#ifndef SEQMEAS_ERRORS_H_
#define SEQMEAS_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace seqmeas {

// Base class for every error raised by the library. `kind()` is a short
// machine-readable tag used by the CLI when it reports failures.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

// Malformed input: unknown label, out-of-range value, broken invariant.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message) : Error("validation", message) {}
};

// An operation was called on data it does not accept (e.g. a tau estimate on
// a record whose input was not H).
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& message) : Error("usage", message) {}
};

// The forward model produced a probability below the negativity guard.
class UnphysicalParameterError : public Error {
 public:
  explicit UnphysicalParameterError(const std::string& message)
      : Error("unphysical", message) {}
};

// Reconstruction refused because an error parameter is below the floor.
class IllConditionedError : public Error {
 public:
  IllConditionedError(std::string parameter, const std::string& message)
      : Error("ill-conditioned", message), parameter_(std::move(parameter)) {}
  const std::string& parameter() const { return parameter_; }

 private:
  std::string parameter_;
};

class DegenerateFitError : public Error {
 public:
  explicit DegenerateFitError(const std::string& message) : Error("degenerate", message) {}
};

// Text input (CSV, JSON, config) could not be parsed. `line()` is 1-based, or
// 0 when no line applies.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error("parse", line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io", message) {}
};

}  // namespace seqmeas

#endif  // SEQMEAS_ERRORS_H_
