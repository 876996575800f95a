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

// Join/leave churn between consecutive consensuses, moving-average smoothing,
// threshold alerts, and the "previously unseen fingerprints" counter.

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <unordered_set>
#include <utility>
#include <vector>

#include "sybilscope/dirdata.hpp"

namespace sybilscope {

/// Churn ratios between two consensuses. A side is empty (undefined) when its
/// divisor set is empty.
struct ChurnRatio {
  std::optional<double> alpha_new;   // |cur \ prev| / |cur|
  std::optional<double> alpha_left;  // |prev \ cur| / |prev|
};

/// Both consensuses are restricted to statuses holding `flag` when given.
/// Membership is by fingerprint only.
ChurnRatio churn_ratios(const Consensus& prev, const Consensus& cur,
                        std::optional<Flag> flag = std::nullopt);

/// Like churn_ratios() but throws EmptyConsensus if either ratio is undefined.
/// Requires prev.valid_after() < cur.valid_after().
std::pair<double, double> churn_pair(const Consensus& prev, const Consensus& cur,
                                     std::optional<Flag> flag = std::nullopt);

struct ChurnPoint {
  Timestamp timestamp{};  // valid_after of the later consensus
  std::optional<double> alpha_new;
  std::optional<double> alpha_left;
  std::optional<Flag> flag;  // empty = all relays

  bool defined() const { return alpha_new.has_value() && alpha_left.has_value(); }
};

struct Gap {
  Timestamp from{};
  Timestamp to{};
};

struct ChurnSeries {
  std::optional<Flag> flag;
  std::vector<ChurnPoint> points;
  std::vector<Gap> gaps;

  std::vector<std::optional<double>> alpha_new() const;
  std::vector<std::optional<double>> alpha_left() const;
};

inline constexpr std::chrono::seconds kConsensusInterval = std::chrono::hours(1);

/// One series per requested flag (std::nullopt = flag-agnostic), in request
/// order. Pairs spaced further apart than `interval` become gaps.
/// Throws InvalidArgument unless valid_after is strictly increasing.
std::vector<ChurnSeries> churn_series(std::span<const Consensus> consensuses,
                                      std::span<const std::optional<Flag>> flags,
                                      std::chrono::seconds interval = kConsensusInterval);

/// Trailing simple moving average over up to `window` samples; the first
/// window-1 outputs average the shorter prefix. Throws InvalidWindow if
/// window < 1.
std::vector<double> smooth(std::span<const double> series, std::size_t window);

/// As above, but undefined samples are skipped; an output is undefined when its
/// window holds no defined sample.
std::vector<std::optional<double>> smooth(std::span<const std::optional<double>> series,
                                          std::size_t window);

enum class Direction { New, Left };

std::string_view direction_name(Direction direction);

struct Alert {
  Timestamp timestamp{};
  Direction direction = Direction::New;
  double value = 0.0;  // smoothed value that exceeded the threshold
};

/// One alert per point and direction whose smoothed value is strictly above
/// `threshold`. Ordered by time, "new" before "left" at the same time.
std::vector<Alert> alerts(const ChurnSeries& series, double threshold, std::size_t window);

struct SweepCell {
  std::size_t window = 0;
  double threshold = 0.0;
  std::size_t count = 0;
};

/// Alert counts for every (window, threshold) pair, windows outermost.
std::vector<SweepCell> sweep_alerts(const ChurnSeries& series, std::span<const double> thresholds,
                                    std::span<const std::size_t> windows);

inline constexpr std::size_t kNewFingerprintThreshold = 50;

/// Fingerprints seen in any consensus processed so far.
class FingerprintHistory {
 public:
  /// Adds the consensus's fingerprints; returns how many were unseen.
  std::size_t observe(const Consensus& consensus);

  std::size_t distinct() const { return seen_.size(); }
  bool seen(const Fingerprint& fp) const { return seen_.contains(fp); }
  /// Unseen-fingerprint count of every consensus observed, in order.
  const std::vector<std::size_t>& new_counts() const { return new_counts_; }

 private:
  std::unordered_set<Fingerprint> seen_;
  std::vector<std::size_t> new_counts_;
};

struct NewFingerprintResult {
  std::size_t count = 0;
  bool alert = false;
};

/// Counts fingerprints in `cur` never seen before, alerts when the count is at
/// least `threshold`, then adds them to `history`.
NewFingerprintResult new_fingerprint_alert(FingerprintHistory& history, const Consensus& cur,
                                           std::size_t threshold = kNewFingerprintThreshold);

}  // namespace sybilscope
