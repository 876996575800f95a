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

#include "sybilscope/churn.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "sybilscope/error.hpp"

namespace sybilscope {
namespace {

struct SetSizes {
  std::size_t prev = 0;
  std::size_t cur = 0;
  std::size_t prev_only = 0;
  std::size_t cur_only = 0;
};

// Both consensuses iterate in ascending fingerprint order, so one merge pass
// yields both set complements.
SetSizes compare(const Consensus& prev, const Consensus& cur, std::optional<Flag> flag) {
  auto keep = [&](const RouterStatus& s) { return !flag || s.flags.has(*flag); };
  SetSizes n;
  auto p = prev.begin();
  auto c = cur.begin();
  auto skip = [&](auto& it, auto end) {
    while (it != end && !keep(*it)) ++it;
  };
  skip(p, prev.end());
  skip(c, cur.end());
  while (p != prev.end() || c != cur.end()) {
    if (c == cur.end() || (p != prev.end() && p->fingerprint < c->fingerprint)) {
      ++n.prev;
      ++n.prev_only;
      ++p;
    } else if (p == prev.end() || c->fingerprint < p->fingerprint) {
      ++n.cur;
      ++n.cur_only;
      ++c;
    } else {
      ++n.prev;
      ++n.cur;
      ++p;
      ++c;
    }
    skip(p, prev.end());
    skip(c, cur.end());
  }
  return n;
}

// Mean clamped to the window's range: rounding in the sum must not push a
// constant window off its value or an output outside [min, max].
struct WindowMean {
  double sum = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;

  void add(double x) {
    lo = count == 0 ? x : std::min(lo, x);
    hi = count == 0 ? x : std::max(hi, x);
    sum += x;
    ++count;
  }
  double value() const { return std::clamp(sum / static_cast<double>(count), lo, hi); }
};

std::vector<std::optional<double>> project(const ChurnSeries& s, Direction d) {
  std::vector<std::optional<double>> out;
  out.reserve(s.points.size());
  for (const ChurnPoint& p : s.points) out.push_back(d == Direction::New ? p.alpha_new : p.alpha_left);
  return out;
}

}  // namespace

ChurnRatio churn_ratios(const Consensus& prev, const Consensus& cur, std::optional<Flag> flag) {
  const SetSizes n = compare(prev, cur, flag);
  ChurnRatio r;
  if (n.cur > 0) r.alpha_new = static_cast<double>(n.cur_only) / static_cast<double>(n.cur);
  if (n.prev > 0) r.alpha_left = static_cast<double>(n.prev_only) / static_cast<double>(n.prev);
  return r;
}

std::pair<double, double> churn_pair(const Consensus& prev, const Consensus& cur,
                                     std::optional<Flag> flag) {
  if (!(prev.valid_after() < cur.valid_after())) {
    throw InvalidArgument("churn_pair: previous consensus must be older");
  }
  const ChurnRatio r = churn_ratios(prev, cur, flag);
  if (!r.alpha_new || !r.alpha_left) {
    throw EmptyConsensus(fmt::format("no relays{}{} in {} consensus", flag ? " with flag " : "",
                                     flag ? flag_name(*flag) : "",
                                     r.alpha_left ? "current" : "previous"));
  }
  return {*r.alpha_new, *r.alpha_left};
}

std::vector<std::optional<double>> ChurnSeries::alpha_new() const {
  return project(*this, Direction::New);
}

std::vector<std::optional<double>> ChurnSeries::alpha_left() const {
  return project(*this, Direction::Left);
}

std::vector<ChurnSeries> churn_series(std::span<const Consensus> consensuses,
                                      std::span<const std::optional<Flag>> flags,
                                      std::chrono::seconds interval) {
  std::vector<ChurnSeries> out(flags.size());
  for (std::size_t f = 0; f < flags.size(); ++f) out[f].flag = flags[f];
  for (std::size_t i = 1; i < consensuses.size(); ++i) {
    const Consensus& prev = consensuses[i - 1];
    const Consensus& cur = consensuses[i];
    if (!(prev.valid_after() < cur.valid_after())) {
      throw InvalidArgument("churn_series: valid-after must be strictly increasing");
    }
    if (cur.valid_after() - prev.valid_after() > interval) {
      for (ChurnSeries& s : out) s.gaps.push_back({prev.valid_after(), cur.valid_after()});
      continue;
    }
    for (ChurnSeries& s : out) {
      const ChurnRatio r = churn_ratios(prev, cur, s.flag);
      s.points.push_back({cur.valid_after(), r.alpha_new, r.alpha_left, s.flag});
    }
  }
  return out;
}

std::vector<double> smooth(std::span<const double> series, std::size_t window) {
  if (window < 1) throw InvalidWindow("smoothing window must be at least 1");
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::size_t begin = i + 1 >= window ? i + 1 - window : 0;
    WindowMean mean;
    for (std::size_t j = begin; j <= i; ++j) mean.add(series[j]);
    out[i] = mean.value();
  }
  return out;
}

std::vector<std::optional<double>> smooth(std::span<const std::optional<double>> series,
                                          std::size_t window) {
  if (window < 1) throw InvalidWindow("smoothing window must be at least 1");
  std::vector<std::optional<double>> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::size_t begin = i + 1 >= window ? i + 1 - window : 0;
    WindowMean mean;
    for (std::size_t j = begin; j <= i; ++j) {
      if (series[j]) mean.add(*series[j]);
    }
    if (mean.count > 0) out[i] = mean.value();
  }
  return out;
}

std::string_view direction_name(Direction direction) {
  return direction == Direction::New ? "new" : "left";
}

std::vector<Alert> alerts(const ChurnSeries& series, double threshold, std::size_t window) {
  if (!(threshold > 0.0)) throw InvalidArgument("alert threshold must be positive");
  const auto smoothed_new = smooth(series.alpha_new(), window);
  const auto smoothed_left = smooth(series.alpha_left(), window);
  std::vector<Alert> out;
  for (std::size_t i = 0; i < series.points.size(); ++i) {
    const Timestamp t = series.points[i].timestamp;
    if (smoothed_new[i] && *smoothed_new[i] > threshold) {
      out.push_back({t, Direction::New, *smoothed_new[i]});
    }
    if (smoothed_left[i] && *smoothed_left[i] > threshold) {
      out.push_back({t, Direction::Left, *smoothed_left[i]});
    }
  }
  return out;
}

std::vector<SweepCell> sweep_alerts(const ChurnSeries& series, std::span<const double> thresholds,
                                    std::span<const std::size_t> windows) {
  if (thresholds.empty() || windows.empty()) {
    throw InvalidArgument("sweep needs at least one threshold and one window");
  }
  std::vector<SweepCell> out;
  out.reserve(thresholds.size() * windows.size());
  for (std::size_t w : windows) {
    for (double t : thresholds) out.push_back({w, t, alerts(series, t, w).size()});
  }
  return out;
}

std::size_t FingerprintHistory::observe(const Consensus& consensus) {
  std::size_t fresh = 0;
  for (const RouterStatus& s : consensus) {
    if (seen_.insert(s.fingerprint).second) ++fresh;
  }
  new_counts_.push_back(fresh);
  return fresh;
}

NewFingerprintResult new_fingerprint_alert(FingerprintHistory& history, const Consensus& cur,
                                           std::size_t threshold) {
  const std::size_t count = history.observe(cur);
  return {count, count >= threshold};
}

}  // namespace sybilscope
