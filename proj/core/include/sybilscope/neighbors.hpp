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

// Nearest-neighbour search over relay configurations by edit distance.

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sybilscope/dirdata.hpp"

namespace sybilscope {

/// Unit-cost insert/delete/substitute edit distance.
std::size_t levenshtein(std::string_view a, std::string_view b);

/// Canonical configuration string, "|"-separated:
/// nickname|address|or_port|dir_port|version|bandwidth|flags|exit_policy|platform|contact|uptime_days
/// Absent values (including dir_port 0 and a missing descriptor) are empty.
std::string serialize_relay(const RouterStatus& status, const RouterDescriptor* descriptor = nullptr);

using DescriptorLookup = std::map<Fingerprint, RouterDescriptor>;

struct Neighbor {
  Fingerprint fingerprint;
  std::size_t distance = 0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct NeighborRanking {
  Fingerprint seed;
  /// Ascending by (distance, fingerprint); never contains the seed.
  std::vector<Neighbor> entries;
};

/// The `n` relays closest to `seed`. Throws SeedNotFound or InvalidArgument
/// (n == 0).
NeighborRanking nearest(const Fingerprint& seed, const Consensus& consensus,
                        const DescriptorLookup& descriptors, std::size_t n);

using RankingFn = std::function<NeighborRanking(const Fingerprint& seed, std::size_t n)>;

struct MemberAccuracy {
  std::size_t group = 0;
  Fingerprint member;
  double accuracy = 0.0;
};

/// For every member of every group, the share of its n-1 nearest neighbours
/// that belong to its group. Throws GroupMemberMissing or InvalidArgument
/// (group smaller than 2).
std::vector<MemberAccuracy> accuracy(const RankingFn& ranking,
                                     std::span<const std::vector<Fingerprint>> groups,
                                     const Consensus& consensus);

/// accuracy() with nearest() over `consensus` as the ranking function.
std::vector<MemberAccuracy> accuracy(std::span<const std::vector<Fingerprint>> groups,
                                     const Consensus& consensus,
                                     const DescriptorLookup& descriptors);

}  // namespace sybilscope
