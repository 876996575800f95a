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

#include "sybilscope/neighbors.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "sybilscope/error.hpp"

namespace sybilscope {

std::size_t levenshtein(std::string_view a, std::string_view b) {
  // Shared prefix and suffix never need edits.
  while (!a.empty() && !b.empty() && a.front() == b.front()) {
    a.remove_prefix(1);
    b.remove_prefix(1);
  }
  while (!a.empty() && !b.empty() && a.back() == b.back()) {
    a.remove_suffix(1);
    b.remove_suffix(1);
  }
  if (a.size() < b.size()) std::swap(a, b);
  if (b.empty()) return a.size();

  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({up + 1, row[j - 1] + 1, sub});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string serialize_relay(const RouterStatus& status, const RouterDescriptor* descriptor) {
  std::string flags;
  for (const std::string& token : status.flags.tokens()) {
    if (!flags.empty()) flags += ',';
    flags += token;
  }
  std::string platform;
  std::string contact;
  std::string uptime_days;
  if (descriptor) {
    platform = descriptor->platform;
    contact = descriptor->contact.value_or("");
    if (descriptor->uptime_seconds) uptime_days = std::to_string(*descriptor->uptime_seconds / 86400);
  }
  return fmt::format("{}|{}|{}|{}|{}|{}|{}|{}|{}|{}|{}", status.nickname, status.address.str(),
                     status.or_port, status.dir_port == 0 ? "" : std::to_string(status.dir_port),
                     status.version.value_or(""),
                     status.bandwidth ? std::to_string(*status.bandwidth) : "", flags,
                     status.exit_policy_summary.value_or(""), platform, contact, uptime_days);
}

namespace {

const RouterDescriptor* lookup(const DescriptorLookup& descriptors, const Fingerprint& fp) {
  auto it = descriptors.find(fp);
  return it == descriptors.end() ? nullptr : &it->second;
}

}  // namespace

NeighborRanking nearest(const Fingerprint& seed, const Consensus& consensus,
                        const DescriptorLookup& descriptors, std::size_t n) {
  if (n == 0) throw InvalidArgument("nearest: n must be at least 1");
  const RouterStatus* seed_status = consensus.find(seed);
  if (!seed_status) throw SeedNotFound("seed " + seed.hex() + " is not in the consensus");
  const std::string seed_string = serialize_relay(*seed_status, lookup(descriptors, seed));

  NeighborRanking ranking;
  ranking.seed = seed;
  ranking.entries.reserve(consensus.size());
  for (const RouterStatus& s : consensus) {
    if (s.fingerprint == seed) continue;
    const std::string other = serialize_relay(s, lookup(descriptors, s.fingerprint));
    ranking.entries.push_back({s.fingerprint, levenshtein(seed_string, other)});
  }
  auto before = [](const Neighbor& x, const Neighbor& y) {
    return x.distance != y.distance ? x.distance < y.distance : x.fingerprint < y.fingerprint;
  };
  const std::size_t k = std::min(n, ranking.entries.size());
  std::partial_sort(ranking.entries.begin(), ranking.entries.begin() + static_cast<std::ptrdiff_t>(k),
                    ranking.entries.end(), before);
  ranking.entries.resize(k);
  return ranking;
}

std::vector<MemberAccuracy> accuracy(const RankingFn& ranking,
                                     std::span<const std::vector<Fingerprint>> groups,
                                     const Consensus& consensus) {
  std::vector<MemberAccuracy> out;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const std::set<Fingerprint> members(groups[g].begin(), groups[g].end());
    if (members.size() < 2) throw InvalidArgument("accuracy: groups need at least two members");
    for (const Fingerprint& m : members) {
      if (!consensus.contains(m)) {
        throw GroupMemberMissing("group member " + m.hex() + " is not in the consensus");
      }
    }
    const std::size_t relatives = members.size() - 1;
    std::set<Fingerprint> done;
    for (const Fingerprint& m : groups[g]) {
      if (!done.insert(m).second) continue;
      const NeighborRanking r = ranking(m, relatives);
      std::size_t hits = 0;
      for (std::size_t k = 0; k < std::min(relatives, r.entries.size()); ++k) {
        const Fingerprint& fp = r.entries[k].fingerprint;
        if (fp != m && members.contains(fp)) ++hits;
      }
      out.push_back({g, m, static_cast<double>(hits) / static_cast<double>(relatives)});
    }
  }
  return out;
}

std::vector<MemberAccuracy> accuracy(std::span<const std::vector<Fingerprint>> groups,
                                     const Consensus& consensus,
                                     const DescriptorLookup& descriptors) {
  return accuracy(
      [&](const Fingerprint& seed, std::size_t n) {
        return nearest(seed, consensus, descriptors, n);
      },
      groups, consensus);
}

}  // namespace sybilscope
