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

#include <charconv>

#include "lines.hpp"
#include "sybilscope/dirdata.hpp"

namespace sybilscope {
namespace {

bool address_matches(const Ipv4& address, std::string_view prefix) {
  const auto slash = prefix.find('/');
  if (slash == std::string_view::npos) return address.str().starts_with(prefix);
  auto network = Ipv4::parse(prefix.substr(0, slash));
  auto bits = detail::parse_uint<unsigned>(prefix.substr(slash + 1));
  if (!network || !bits || *bits > 32) return false;
  if (*bits == 0) return true;
  const std::uint32_t mask = ~std::uint32_t{0} << (32 - *bits);
  return (address.value() & mask) == (network->value() & mask);
}

}  // namespace

bool FilterSpec::matches(const RouterStatus& s) const {
  if (nickname) {
    const bool ok = nickname_match == NicknameMatch::Exact
                        ? s.nickname == *nickname
                        : s.nickname.find(*nickname) != std::string::npos;
    if (!ok) return false;
  }
  if (flag && !s.flags.has(*flag)) return false;
  if (or_port && s.or_port != *or_port) return false;
  if (dir_port && s.dir_port != *dir_port) return false;
  if (address_prefix && !address_matches(s.address, *address_prefix)) return false;
  if (version && (!s.version || s.version->find(*version) == std::string::npos)) return false;
  return true;
}

bool FilterSpec::empty() const {
  return !nickname && !flag && !or_port && !dir_port && !address_prefix && !version;
}

Consensus filter(const Consensus& consensus, const FilterSpec& spec) {
  if (spec.empty()) return consensus;
  std::vector<RouterStatus> kept;
  for (const RouterStatus& s : consensus) {
    if (spec.matches(s)) kept.push_back(s);
  }
  return Consensus(consensus.valid_after(), std::move(kept));
}

}  // namespace sybilscope
