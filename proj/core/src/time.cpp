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

#include "sybilscope/time.hpp"

#include <charconv>

#include <fmt/format.h>

namespace sybilscope {
namespace {

bool parse_fixed(std::string_view text, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > text.size()) return false;
  int value = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    const char c = text[i];
    if (c < '0' || c > '9') return false;
    value = value * 10 + (c - '0');
  }
  out = value;
  return true;
}

std::optional<std::chrono::sys_days> parse_day(std::string_view date) {
  int y = 0;
  int m = 0;
  int d = 0;
  if (date.size() != 10 || date[4] != '-' || date[7] != '-') return std::nullopt;
  if (!parse_fixed(date, 0, 4, y) || !parse_fixed(date, 5, 2, m) || !parse_fixed(date, 8, 2, d)) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return std::chrono::sys_days{ymd};
}

std::optional<std::chrono::seconds> parse_clock(std::string_view time) {
  int h = 0;
  int m = 0;
  int s = 0;
  if (time.size() != 8 || time[2] != ':' || time[5] != ':') return std::nullopt;
  if (!parse_fixed(time, 0, 2, h) || !parse_fixed(time, 3, 2, m) || !parse_fixed(time, 6, 2, s)) {
    return std::nullopt;
  }
  if (h > 23 || m > 59 || s > 60) return std::nullopt;
  return std::chrono::hours{h} + std::chrono::minutes{m} + std::chrono::seconds{s};
}

struct Civil {
  int year;
  unsigned month;
  unsigned day;
  long long hour;
  long long minute;
  long long second;
};

Civil to_civil(Timestamp ts) {
  const auto day = std::chrono::floor<std::chrono::days>(ts);
  const std::chrono::year_month_day ymd{day};
  const std::chrono::hh_mm_ss hms{ts - day};
  return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
          static_cast<unsigned>(ymd.day()), hms.hours().count(), hms.minutes().count(),
          hms.seconds().count()};
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view date, std::string_view time) {
  const auto day = parse_day(date);
  const auto clock = parse_clock(time);
  if (!day || !clock) return std::nullopt;
  return Timestamp{*day} + *clock;
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  if (text.size() != 19 || (text[10] != ' ' && text[10] != 'T')) return std::nullopt;
  return parse_timestamp(text.substr(0, 10), text.substr(11));
}

std::optional<Timestamp> parse_date(std::string_view text) {
  const auto day = parse_day(text);
  if (!day) return std::nullopt;
  return Timestamp{*day};
}

std::string format_timestamp(Timestamp ts) {
  const Civil c = to_civil(ts);
  return fmt::format("{:04}-{:02}-{:02} {:02}:{:02}:{:02}", c.year, c.month, c.day, c.hour,
                     c.minute, c.second);
}

std::string format_iso8601(Timestamp ts) {
  const Civil c = to_civil(ts);
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}", c.year, c.month, c.day, c.hour,
                     c.minute, c.second);
}

std::string format_date(Timestamp ts) {
  const Civil c = to_civil(ts);
  return fmt::format("{:04}-{:02}-{:02}", c.year, c.month, c.day);
}

}  // namespace sybilscope
