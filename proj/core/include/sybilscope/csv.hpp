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

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace sybilscope {

/// Minimal RFC 4180 writer: comma separated, "\n" line ends, fields quoted
/// only when they contain a comma, quote or line break.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void row(std::initializer_list<std::string_view> fields);
  void row(const std::vector<std::string>& fields);

 private:
  void field(std::string_view value, bool first);

  std::ostream& out_;
};

std::string csv_escape(std::string_view value);

/// Splits one CSV line (no embedded line breaks).
std::vector<std::string> csv_split(std::string_view line);

/// Fixed-point rendering used in every CSV so output is byte-stable.
std::string format_ratio(double value);

}  // namespace sybilscope
