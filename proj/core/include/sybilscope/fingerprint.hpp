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
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "sybilscope/dirdata.hpp"

namespace sybilscope {

struct FingerprintRecord {
  Ipv4 address;
  /// Distinct fingerprints in order of first appearance.
  std::vector<Fingerprint> fingerprints;
  /// Consensuses in which the address's fingerprint set differed from the
  /// previous consensus the address appeared in.
  std::size_t transitions = 0;
  Timestamp first_seen{};
  Timestamp last_seen{};
};

/// Incremental per-address fingerprint table.
class FingerprintTracker {
 public:
  void observe(const Consensus& consensus);

  const std::map<Ipv4, FingerprintRecord>& records() const { return records_; }

 private:
  std::map<Ipv4, FingerprintRecord> records_;
  std::map<Ipv4, std::set<Fingerprint>> members_;
  std::map<Ipv4, std::vector<Fingerprint>> last_set_;
};

std::map<Ipv4, FingerprintRecord> track(std::span<const Consensus> consensuses);

/// Records by descending distinct-fingerprint count, ties by ascending address.
/// Throws InvalidArgument if n == 0.
std::vector<FingerprintRecord> top_changers(const std::map<Ipv4, FingerprintRecord>& records,
                                            std::size_t n);

struct PrefixCost {
  double expected_ops = 0.0;
  std::optional<double> expected_seconds;
};

/// Average work to match an n-digit base32 onion-address prefix, 2^(5n-1).
/// Throws DomainError unless 1 <= digits <= 16.
PrefixCost prefix_collision_cost(int digits, std::optional<double> hashes_per_second = std::nullopt);

}  // namespace sybilscope
