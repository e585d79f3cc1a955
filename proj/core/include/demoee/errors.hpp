// Copyright 2026 The demoee Authors.
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

#ifndef DEMOEE_ERRORS_HPP_
#define DEMOEE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace demoee {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file (schema JSON, corpus JSONL, config).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Input parsed but violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Name not found (event type, role, example id).
class LookupError : public Error {
 public:
  using Error::Error;
};

// Caller broke a precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Training diverged or the backend failed.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, std::string batch_dump)
      : Error(what), batch_dump_(std::move(batch_dump)) {}
  const std::string& batch_dump() const { return batch_dump_; }

 private:
  std::string batch_dump_;
};

}  // namespace demoee

#endif  // DEMOEE_ERRORS_HPP_
