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

#include "sybilscope/dirdata.hpp"

#include <algorithm>
#include <charconv>

#include <fmt/format.h>

namespace sybilscope {
namespace {

constexpr std::array<std::string_view, kFlagCount> kFlagNames = {
    "Authority", "BadExit", "Exit",    "Fast",    "Guard", "HSDir",
    "Named",     "Running", "Stable",  "Unnamed", "V2Dir", "Valid",
};

}  // namespace

std::string_view flag_name(Flag flag) { return kFlagNames[static_cast<std::size_t>(flag)]; }

std::optional<Flag> parse_flag(std::string_view token) {
  for (std::size_t i = 0; i < kFlagNames.size(); ++i) {
    if (kFlagNames[i] == token) return static_cast<Flag>(i);
  }
  return std::nullopt;
}

FlagSet::FlagSet(std::initializer_list<Flag> flags) {
  for (Flag f : flags) insert(f);
}

void FlagSet::insert_token(std::string_view token) {
  if (auto flag = parse_flag(token)) {
    insert(*flag);
    return;
  }
  auto it = std::lower_bound(unknown_.begin(), unknown_.end(), token);
  if (it == unknown_.end() || *it != token) unknown_.insert(it, std::string(token));
}

std::vector<std::string> FlagSet::tokens() const {
  std::vector<std::string> out;
  out.reserve(size());
  for (Flag f : kAllFlags) {
    if (has(f)) out.emplace_back(flag_name(f));
  }
  out.insert(out.end(), unknown_.begin(), unknown_.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<Ipv4> Ipv4::parse(std::string_view text) {
  std::uint32_t value = 0;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int octet = 0; octet < 4; ++octet) {
    if (octet > 0) {
      if (p == end || *p != '.') return std::nullopt;
      ++p;
    }
    // No signs, no leading zeros beyond a lone "0", at most three digits.
    if (p == end || *p < '0' || *p > '9') return std::nullopt;
    const char* start = p;
    unsigned part = 0;
    auto [next, ec] = std::from_chars(p, end, part);
    if (ec != std::errc{} || part > 255 || next - start > 3) return std::nullopt;
    if (next - start > 1 && *start == '0') return std::nullopt;
    value = (value << 8) | part;
    p = next;
  }
  if (p != end) return std::nullopt;
  return Ipv4(value);
}

std::string Ipv4::str() const {
  return fmt::format("{}.{}.{}.{}", value_ >> 24, (value_ >> 16) & 0xFF, (value_ >> 8) & 0xFF,
                     value_ & 0xFF);
}

Consensus::Consensus(Timestamp valid_after, std::vector<RouterStatus> statuses)
    : valid_after_(valid_after), statuses_(std::move(statuses)) {
  std::stable_sort(statuses_.begin(), statuses_.end(),
                   [](const RouterStatus& a, const RouterStatus& b) {
                     return a.fingerprint < b.fingerprint;
                   });
  auto last = std::unique(statuses_.begin(), statuses_.end(),
                          [](const RouterStatus& a, const RouterStatus& b) {
                            return a.fingerprint == b.fingerprint;
                          });
  statuses_.erase(last, statuses_.end());
}

const RouterStatus* Consensus::find(const Fingerprint& fingerprint) const {
  auto it = std::lower_bound(statuses_.begin(), statuses_.end(), fingerprint,
                             [](const RouterStatus& s, const Fingerprint& fp) {
                               return s.fingerprint < fp;
                             });
  if (it == statuses_.end() || it->fingerprint != fingerprint) return nullptr;
  return &*it;
}

}  // namespace sybilscope
