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

// In-memory model of Tor directory documents: router statuses, network
// consensuses and server descriptors, plus parsing, serialization and
// predicate-based filtering.

#include <array>
#include <bitset>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sybilscope/digest.hpp"
#include "sybilscope/time.hpp"

namespace sybilscope {

/// Relay flags assigned by the directory authorities.
enum class Flag : std::uint8_t {
  Authority,
  BadExit,
  Exit,
  Fast,
  Guard,
  HSDir,
  Named,
  Running,
  Stable,
  Unnamed,
  V2Dir,
  Valid,
};

inline constexpr std::size_t kFlagCount = 12;

/// All known flags in ascending name order.
inline constexpr std::array<Flag, kFlagCount> kAllFlags = {
    Flag::Authority, Flag::BadExit, Flag::Exit,    Flag::Fast,
    Flag::Guard,     Flag::HSDir,   Flag::Named,   Flag::Running,
    Flag::Stable,    Flag::Unnamed, Flag::V2Dir,   Flag::Valid,
};

std::string_view flag_name(Flag flag);
std::optional<Flag> parse_flag(std::string_view token);

/// Known flags as a bitset plus any unrecognised tokens, kept verbatim.
class FlagSet {
 public:
  FlagSet() = default;
  FlagSet(std::initializer_list<Flag> flags);

  bool has(Flag flag) const { return known_.test(static_cast<std::size_t>(flag)); }
  void insert(Flag flag) { known_.set(static_cast<std::size_t>(flag)); }
  void erase(Flag flag) { known_.reset(static_cast<std::size_t>(flag)); }

  /// Adds a raw token; recognised names set the flag, others are kept as-is.
  void insert_token(std::string_view token);

  /// Unknown tokens, sorted and unique.
  const std::vector<std::string>& unknown() const { return unknown_; }

  bool empty() const { return known_.none() && unknown_.empty(); }
  std::size_t size() const { return known_.count() + unknown_.size(); }

  /// Every token (known and unknown) in ascending byte order.
  std::vector<std::string> tokens() const;

  friend bool operator==(const FlagSet&, const FlagSet&) = default;

 private:
  std::bitset<kFlagCount> known_;
  std::vector<std::string> unknown_;
};

/// IPv4 address in host byte order.
class Ipv4 {
 public:
  constexpr Ipv4() = default;
  constexpr explicit Ipv4(std::uint32_t value) : value_(value) {}

  static std::optional<Ipv4> parse(std::string_view text);

  std::uint32_t value() const noexcept { return value_; }
  std::string str() const;

  friend auto operator<=>(const Ipv4&, const Ipv4&) = default;

 private:
  std::uint32_t value_ = 0;
};

/// One relay's entry in a consensus.
struct RouterStatus {
  std::string nickname;
  Fingerprint fingerprint;
  DescriptorDigest descriptor_digest;
  Timestamp published{};
  Ipv4 address;
  std::uint16_t or_port = 0;
  std::uint16_t dir_port = 0;  // 0 means no directory port
  FlagSet flags;
  std::optional<std::string> version;
  std::optional<std::uint64_t> bandwidth;
  std::optional<std::string> exit_policy_summary;

  friend bool operator==(const RouterStatus&, const RouterStatus&) = default;
};

/// An hourly network snapshot. Statuses are unique by fingerprint and iterate
/// in ascending fingerprint order. Immutable once built.
class Consensus {
 public:
  using const_iterator = std::vector<RouterStatus>::const_iterator;

  Consensus() = default;

  /// Sorts by fingerprint. If a fingerprint repeats, the first occurrence in
  /// `statuses` wins and the rest are dropped.
  Consensus(Timestamp valid_after, std::vector<RouterStatus> statuses);

  Timestamp valid_after() const { return valid_after_; }
  std::span<const RouterStatus> statuses() const { return statuses_; }
  std::size_t size() const { return statuses_.size(); }
  bool empty() const { return statuses_.empty(); }

  const_iterator begin() const { return statuses_.begin(); }
  const_iterator end() const { return statuses_.end(); }

  const RouterStatus* find(const Fingerprint& fingerprint) const;
  bool contains(const Fingerprint& fingerprint) const { return find(fingerprint) != nullptr; }

  friend bool operator==(const Consensus&, const Consensus&) = default;

 private:
  Timestamp valid_after_{};
  std::vector<RouterStatus> statuses_;
};

/// A relay's self-published server descriptor. All values are self-reported.
struct RouterDescriptor {
  std::string nickname;
  Ipv4 address;
  std::uint16_t or_port = 0;
  std::uint16_t dir_port = 0;
  std::string platform;
  Timestamp published{};
  Fingerprint fingerprint;
  std::optional<std::uint64_t> uptime_seconds;
  std::uint64_t bandwidth_avg = 0;
  std::uint64_t bandwidth_burst = 0;
  std::uint64_t bandwidth_observed = 0;
  std::optional<std::string> contact;
  std::vector<std::string> family;
  std::vector<std::string> exit_policy;  // "accept *:80", "reject *:*", ...

  friend bool operator==(const RouterDescriptor&, const RouterDescriptor&) = default;
};

/// Non-fatal parser observation (e.g. a duplicate fingerprint that was dropped).
struct ParseWarning {
  std::size_t line = 0;
  std::string message;
};

/// Parses a v3 network-status consensus. Signature blocks and unknown lines
/// are skipped. Throws MalformedDocument.
Consensus parse_consensus(std::string_view text, std::vector<ParseWarning>* warnings = nullptr);

/// Parses a single server descriptor. Throws MalformedDocument.
RouterDescriptor parse_descriptor(std::string_view text);

/// Parses a file of concatenated server descriptors (CollecTor layout).
/// Line numbers in errors refer to the whole input.
std::vector<RouterDescriptor> parse_descriptors(std::string_view text);

/// Writes the consensus in the supported grammar subset.
std::string serialize_consensus(const Consensus& consensus);

/// Writes the descriptor in the supported grammar subset (unsigned).
std::string serialize_descriptor(const RouterDescriptor& descriptor);

/// Conjunction of optional matchers. An empty spec matches everything.
struct FilterSpec {
  enum class NicknameMatch { Exact, Substring };

  std::optional<std::string> nickname;
  NicknameMatch nickname_match = NicknameMatch::Exact;
  std::optional<Flag> flag;
  std::optional<std::uint16_t> or_port;
  std::optional<std::uint16_t> dir_port;
  /// Either CIDR ("10.0.0.0/8") or a dotted-text prefix ("10.0.").
  std::optional<std::string> address_prefix;
  /// Substring of the status's version line.
  std::optional<std::string> version;

  bool matches(const RouterStatus& status) const;
  bool empty() const;
};

Consensus filter(const Consensus& consensus, const FilterSpec& spec);

}  // namespace sybilscope
