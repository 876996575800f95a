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

// End-to-end runs: read inputs, restrict by date and filter, fan out to the
// selected analysis modules and write their CSV/PPM artifacts.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sybilscope/churn.hpp"
#include "sybilscope/dirdata.hpp"

namespace sybilscope {

enum class Module { Churn, Uptime, Fingerprints, Neighbors, Synth };

std::string_view module_name(Module module);
std::optional<Module> parse_module(std::string_view name);

inline constexpr int kExitClean = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitAlerts = 2;

struct ChurnParams {
  double threshold = 0.012;
  /// The first window drives churn.csv and the exit status; all of them are
  /// used for the sweep.
  std::vector<std::size_t> windows{1, 4, 8, 16};
  std::vector<std::optional<Flag>> flags{std::nullopt};
  /// Empty means a default grid.
  std::vector<double> sweep_thresholds;
  std::size_t new_fingerprint_threshold = kNewFingerprintThreshold;
};

struct UptimeParams {
  std::size_t image_width = 3000;
};

struct FingerprintParams {
  std::size_t top = 50;
};

struct NeighborParams {
  /// Fingerprint (hex) or nickname.
  std::string seed;
  std::size_t top = 10;
  /// Optional ground-truth CSV (group_id,fingerprint) for the accuracy harness.
  std::optional<std::filesystem::path> groups;
};

struct SynthParams {
  std::filesystem::path spec;
};

struct RunConfig {
  std::vector<std::filesystem::path> inputs;
  std::optional<Timestamp> from;  // inclusive, on valid_after
  std::optional<Timestamp> to;    // inclusive
  FilterSpec filter;
  std::set<Module> modules;
  ChurnParams churn;
  UptimeParams uptime;
  FingerprintParams fingerprints;
  NeighborParams neighbors;
  SynthParams synth;
  std::filesystem::path out = ".";
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct RunResult {
  int exit_code = kExitClean;
  std::size_t alerts = 0;
  std::size_t skipped_documents = 0;
  std::vector<std::filesystem::path> artifacts;
  /// Human-readable summary lines (top-n tables, alert counts) for stdout.
  std::vector<std::string> report;
  std::string error;  // set when exit_code == kExitFatal
};

/// Never throws; fatal problems are reported through exit_code and error.
RunResult run(const RunConfig& config);

}  // namespace sybilscope
