// Copyright 2026 The AdaDemo Authors
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

#ifndef ADADEMO_ERROR_H_
#define ADADEMO_ERROR_H_

#include <stdexcept>
#include <string>

namespace adademo {

// Base class for every error raised by the library. The CLI maps
// ConfigError and UsageError to exit code 1 and everything else to 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid run configuration or out-of-range parameter.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// API misuse, e.g. stepping an environment after the episode ended.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Datasets whose shapes disagree (task count, ordering of task ids).
class StructuralError : public Error {
 public:
  using Error::Error;
};

// The same initial state was collected twice for one task.
class DuplicateDemoError : public Error {
 public:
  using Error::Error;
};

// Malformed file content. line() is 1-based; 0 when not line-specific.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Well-formed data whose dimensions disagree with the expected schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Layout or initial-state generation exhausted its retry budget.
class GenerationError : public Error {
 public:
  using Error::Error;
};

// The demonstration collector could not reach the target.
class OracleError : public Error {
 public:
  using Error::Error;
};

// Sampling weights requested from a dataset with no trajectories.
class EmptyDatasetError : public Error {
 public:
  using Error::Error;
};

// Budget estimate requested for a zero success rate.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace adademo

#endif  // ADADEMO_ERROR_H_
