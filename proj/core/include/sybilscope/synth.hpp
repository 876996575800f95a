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

// Synthetic consensus streams with baseline churn and injected relay groups.
// Every detector is evaluated against the ground truth emitted here.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sybilscope/dirdata.hpp"

namespace sybilscope {

struct BaselineSpec {
  std::size_t relay_count = 1000;
  /// Joins per hour as a fraction of relay_count (Bernoulli per slot).
  double hourly_join_rate = 0.0;
  /// Probability that an online relay leaves in a given hour.
  double hourly_leave_rate = 0.0;
  /// Share of joins that are never-seen relays; the rest return from offline.
  double fresh_join_fraction = 0.1;
  /// Per-flag assignment probability, drawn once per relay.
  std::map<Flag, double> flag_probabilities = default_flag_probabilities();
  std::size_t duration_hours = 24;
  std::uint64_t rng_seed = 1;
  Timestamp start = default_start();

  static std::map<Flag, double> default_flag_probabilities();
  static Timestamp default_start();
};

struct UptimePattern {
  enum class Kind {
    Constant,  // online from join to leave
    Diurnal,   // on_hours online, off_hours offline, repeating
    Step,      // on_hours online, one off_hours outage, then online again
  };
  Kind kind = Kind::Constant;
  std::size_t on_hours = 9;
  std::size_t off_hours = 15;
};

struct Similarity {
  enum class Kind {
    Clone,        // identical configuration, adjacent addresses
    Templated,    // nickname prefix + counter, adjacent addresses, shared config
    Diversified,  // independently drawn configurations
  };
  Kind kind = Kind::Templated;
};

struct SybilSpec {
  std::size_t group_size = 2;
  std::size_t join_hour = 0;
  std::optional<std::size_t> leave_hour;  // exclusive; default end of stream
  UptimePattern uptime;
  Similarity similarity;
  /// Distinct fingerprints each member cycles through (keeping its address).
  std::optional<std::size_t> fingerprint_churn;
  // Shared configuration; drawn from the RNG when absent.
  std::optional<std::string> nickname;  // full name (clone) or prefix (templated)
  std::optional<std::uint16_t> or_port;
  std::optional<std::uint16_t> dir_port;
  std::optional<std::string> contact;
};

struct GroundTruthEntry {
  std::size_t group = 0;
  Fingerprint fingerprint;
};

struct SynthResult {
  std::vector<Consensus> consensuses;
  /// Every fingerprint used by an injected group, group-major.
  std::vector<GroundTruthEntry> ground_truth;
  /// Latest descriptor per fingerprint.
  std::map<Fingerprint, RouterDescriptor> descriptors;

  /// Fingerprints of one group in ground-truth order.
  std::vector<Fingerprint> group_members(std::size_t group) const;
};

/// Deterministic for a given seed. Throws SpecError on invalid or
/// contradictory specs.
SynthResult generate(const BaselineSpec& baseline, const std::vector<SybilSpec>& sybils);

struct SynthConfig {
  BaselineSpec baseline;
  std::vector<SybilSpec> sybils;
};

/// Flat "key = value" format; see docs/synth-spec.md. Throws SpecError.
SynthConfig parse_synth_spec(std::string_view text);

/// Writes consensuses/<YYYY-MM-DD-HH-MM-SS>-consensus, server-descriptors and
/// ground-truth.csv below `dir`. Returns the files written.
std::vector<std::filesystem::path> write_synth_output(const SynthResult& result,
                                                      const std::filesystem::path& dir);

}  // namespace sybilscope
