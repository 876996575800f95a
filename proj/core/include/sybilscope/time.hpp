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

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace sybilscope {

/// UTC timestamp at one-second resolution. No time zones anywhere.
using Timestamp = std::chrono::sys_seconds;

/// Parses "YYYY-MM-DD HH:MM:SS" (a 'T' separator is also accepted).
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// Parses a separate date ("YYYY-MM-DD") and time ("HH:MM:SS") token pair.
std::optional<Timestamp> parse_timestamp(std::string_view date, std::string_view time);

/// Parses "YYYY-MM-DD" as midnight of that day.
std::optional<Timestamp> parse_date(std::string_view text);

/// "YYYY-MM-DD HH:MM:SS", the directory-document form.
std::string format_timestamp(Timestamp ts);

/// "YYYY-MM-DDTHH:MM:SS", used in CSV output.
std::string format_iso8601(Timestamp ts);

/// "YYYY-MM-DD".
std::string format_date(Timestamp ts);

}  // namespace sybilscope
