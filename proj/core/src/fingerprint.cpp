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

#include "sybilscope/fingerprint.hpp"

#include <algorithm>
#include <cmath>

#include "sybilscope/error.hpp"

namespace sybilscope {

void FingerprintTracker::observe(const Consensus& consensus) {
  // Fingerprints per address in this consensus; the consensus iterates in
  // fingerprint order so each vector comes out sorted.
  std::map<Ipv4, std::vector<Fingerprint>> current;
  for (const RouterStatus& s : consensus) current[s.address].push_back(s.fingerprint);

  const Timestamp t = consensus.valid_after();
  for (auto& [address, fps] : current) {
    auto [it, inserted] = records_.try_emplace(address);
    FingerprintRecord& rec = it->second;
    std::set<Fingerprint>& known = members_[address];
    if (inserted) {
      rec.address = address;
      rec.first_seen = t;
    } else if (last_set_[address] != fps) {
      ++rec.transitions;
    }
    rec.last_seen = std::max(rec.last_seen, t);
    for (const Fingerprint& fp : fps) {
      if (known.insert(fp).second) rec.fingerprints.push_back(fp);
    }
    last_set_[address] = std::move(fps);
  }
}

std::map<Ipv4, FingerprintRecord> track(std::span<const Consensus> consensuses) {
  FingerprintTracker tracker;
  for (const Consensus& c : consensuses) tracker.observe(c);
  return tracker.records();
}

std::vector<FingerprintRecord> top_changers(const std::map<Ipv4, FingerprintRecord>& records,
                                            std::size_t n) {
  if (n == 0) throw InvalidArgument("top_changers: n must be at least 1");
  std::vector<const FingerprintRecord*> order;
  order.reserve(records.size());
  for (const auto& [_, rec] : records) order.push_back(&rec);
  auto before = [](const FingerprintRecord* a, const FingerprintRecord* b) {
    if (a->fingerprints.size() != b->fingerprints.size()) {
      return a->fingerprints.size() > b->fingerprints.size();
    }
    return a->address < b->address;
  };
  const std::size_t k = std::min(n, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), before);
  std::vector<FingerprintRecord> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(*order[i]);
  return out;
}

PrefixCost prefix_collision_cost(int digits, std::optional<double> hashes_per_second) {
  // Onion addresses have 16 base32 digits of 5 bits each.
  if (digits < 1 || digits > 16) throw DomainError("prefix length must be within [1, 16]");
  PrefixCost cost;
  cost.expected_ops = std::ldexp(1.0, 5 * digits - 1);
  if (hashes_per_second) {
    if (!(*hashes_per_second > 0.0)) throw DomainError("hash rate must be positive");
    cost.expected_seconds = cost.expected_ops / *hashes_per_second;
  }
  return cost;
}

}  // namespace sybilscope
