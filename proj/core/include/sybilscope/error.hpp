// Copyright 2026 The sybilscope Authors
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
#include <stdexcept>
#include <string>

namespace sybilscope {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A directory document violated the supported grammar. `line()` is 1-based.
class MalformedDocument : public Error {
 public:
  MalformedDocument(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A churn ratio was requested over an empty (possibly flag-restricted) set.
class EmptyConsensus : public Error {
 public:
  using Error::Error;
};

class InvalidWindow : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class SeedNotFound : public Error {
 public:
  using Error::Error;
};

class GroupMemberMissing : public Error {
 public:
  using Error::Error;
};

/// Synthetic-stream specification is contradictory or unparseable.
class SpecError : public Error {
 public:
  using Error::Error;
};

/// Precondition violation on an argument (bad threshold, unsorted stream, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace sybilscope
