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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Tolerances and time limits are pinned below.

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "builders.hpp"
#include "oracles.hpp"
#include "sybilscope/churn.hpp"
#include "sybilscope/dirdata.hpp"
#include "sybilscope/error.hpp"
#include "sybilscope/fingerprint.hpp"
#include "sybilscope/neighbors.hpp"
#include "sybilscope/pipeline.hpp"
#include "sybilscope/synth.hpp"
#include "sybilscope/uptime.hpp"

using namespace sybilscope;
using namespace sybilscope::testing;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kChurnTolerance = 1e-12;
constexpr double kChurnSeconds = 10.0;
constexpr std::size_t kLevenshteinExample = 6;
constexpr double kLevenshteinSeconds = 30.0;
constexpr double kPrefixOps = 17179869184.0;  // 2^34
constexpr double kPrefixSeconds = 190.0;
constexpr double kPrefixHashRate = 90e6;
constexpr double kPrefixRelative = 0.01;
constexpr double kMergeTolerance = 1e-12;
constexpr double kClusterSeconds = 60.0;
constexpr double kDetectionThreshold = 0.012;
constexpr std::size_t kDetectionWindow = 1;
constexpr double kDetectionSeconds = 300.0;
constexpr double kMinMeanAccuracy = 0.9;
constexpr double kMinPerfectShare = 0.6;
constexpr double kNeighborSeconds = 120.0;
constexpr double kChurnPairSeconds = 1.0;
constexpr double kSearchSeconds = 5.0;
constexpr double kUptimeMonthSeconds = 600.0;
constexpr double kFingerprintMonthSeconds = 300.0;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, std::string what) {
    if (!ok) pass = false;
    notes.push_back(fmt::format("{} {}", ok ? "ok  " : "FAIL", what));
  }
  void info(std::string what) { notes.push_back("info " + what); }
};

int failures = 0;

void report(int id, const std::string& title, const Outcome& o) {
  fmt::print("{} criterion {}: {}\n", o.pass ? "PASS" : "FAIL", id, title);
  for (const std::string& n : o.notes) fmt::print("    {}\n", n);
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Zero-variance convention: equal sequences correlate perfectly, exact
// complements anti-correlate, anything else against a constant is 0.
double oracle_pearson(const std::vector<bool>& a, const std::vector<bool>& b) {
  if (auto r = textbook_pearson(a, b)) return *r;
  if (a == b) return 1.0;
  bool complement = true;
  for (std::size_t i = 0; i < a.size(); ++i) complement = complement && a[i] != b[i];
  return complement ? -1.0 : 0.0;
}

// ---------------------------------------------------------------------------

Outcome churn_oracle() {
  Outcome o;
  const auto start = Clock::now();
  std::mt19937_64 rng(1001);
  std::size_t mismatches = 0;
  std::size_t out_of_range = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::uint64_t pool = 1 + rng() % 800;
    auto draw = [&] {
      const std::size_t n = 1 + rng() % std::min<std::uint64_t>(500, pool);
      std::vector<std::uint64_t> all(pool);
      for (std::uint64_t i = 0; i < pool; ++i) all[i] = i;
      std::shuffle(all.begin(), all.end(), rng);
      all.resize(n);
      return all;
    };
    const auto prev = draw();
    const auto cur = draw();
    const auto [a_new, a_left] = churn_pair(consensus(hour(0), prev), consensus(hour(1), cur));
    const NaiveChurn naive = naive_churn(prev, cur);
    const double err = std::max(std::abs(a_new - *naive.alpha_new), std::abs(a_left - *naive.alpha_left));
    worst = std::max(worst, err);
    mismatches += err > kChurnTolerance;
    out_of_range += a_new < 0.0 || a_new > 1.0 || a_left < 0.0 || a_left > 1.0;
  }
  const double elapsed = seconds_since(start);
  o.require(mismatches == 0, fmt::format("1000 pairs agree with the set-complement oracle (max error {:.3g}, tol {:g})",
                                         worst, kChurnTolerance));
  o.require(out_of_range == 0, "all ratios in [0, 1]");
  o.require(elapsed < kChurnSeconds, fmt::format("runtime {:.2f} s < {:g} s", elapsed, kChurnSeconds));
  return o;
}

Outcome levenshtein_metric() {
  Outcome o;
  const auto start = Clock::now();
  const std::size_t example = levenshtein("Foo10.0.0.19001", "Bar10.0.0.2549001");
  o.require(example == kLevenshteinExample, fmt::format("worked example distance {} == {}", example, kLevenshteinExample));

  std::mt19937_64 rng(1002);
  auto text = [&] {
    std::string s(rng() % 81, 'a');
    for (char& c : s) c = static_cast<char>('a' + rng() % 5);
    return s;
  };
  std::size_t oracle_miss = 0, symmetry = 0, identity = 0, triangle = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::string a = text(), b = text(), c = text();
    const std::size_t ab = levenshtein(a, b);
    oracle_miss += ab != dp_levenshtein(a, b);
    symmetry += ab != levenshtein(b, a);
    identity += (ab == 0) != (a == b);
    triangle += ab > levenshtein(a, c) + levenshtein(c, b);
  }
  const double elapsed = seconds_since(start);
  o.require(oracle_miss == 0, fmt::format("10000 pairs match the dynamic-programming oracle ({} misses)", oracle_miss));
  o.require(symmetry + identity + triangle == 0,
            fmt::format("symmetry/identity/triangle violations: {}/{}/{}", symmetry, identity, triangle));
  o.require(elapsed < kLevenshteinSeconds, fmt::format("runtime {:.2f} s < {:g} s", elapsed, kLevenshteinSeconds));
  return o;
}

Outcome prefix_cost() {
  Outcome o;
  const PrefixCost c = prefix_collision_cost(7, kPrefixHashRate);
  o.require(c.expected_ops == kPrefixOps, fmt::format("7 digits: {:.0f} operations == 2^34", c.expected_ops));
  const double rel = std::abs(*c.expected_seconds - kPrefixSeconds) / kPrefixSeconds;
  o.require(rel <= kPrefixRelative, fmt::format("{:.2f} s at 90e6 hashes/s within {:g}% of {:g} s (off by {:.3f}%)",
                                                *c.expected_seconds, kPrefixRelative * 100, kPrefixSeconds, rel * 100));
  return o;
}

Outcome clustering() {
  Outcome o;
  const auto start = Clock::now();
  std::mt19937_64 rng(1004);
  std::size_t trace_miss = 0, split_runs = 0, red_miss = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t cols = 1 + rng() % 64;
    const std::size_t rows = 2 + rng() % 167;
    // Columns from a small pool so duplicates and ties are common.
    std::vector<std::vector<bool>> pool;
    for (int k = 0; k < 6; ++k) {
      std::vector<bool> c(rows);
      const unsigned bias = 1 + rng() % 5;
      for (std::size_t r = 0; r < rows; ++r) c[r] = rng() % 6 < bias;
      pool.push_back(c);
    }
    pool.emplace_back(rows, true);
    std::vector<std::vector<bool>> columns;
    for (std::size_t c = 0; c < cols; ++c) {
      if (rng() % 3 == 0) {
        std::vector<bool> fresh(rows);
        for (std::size_t r = 0; r < rows; ++r) fresh[r] = rng() & 1U;
        columns.push_back(fresh);
      } else {
        columns.push_back(pool[rng() % pool.size()]);
      }
    }
    const UptimeMatrix m = UptimeMatrix::from_columns(columns);
    std::vector<std::vector<double>> d(cols, std::vector<double>(cols));
    for (std::size_t i = 0; i < cols; ++i) {
      for (std::size_t j = 0; j < cols; ++j) d[i][j] = i == j ? 0.0 : 1.0 - oracle_pearson(columns[i], columns[j]);
    }
    const NaiveLinkage oracle = naive_single_linkage(d, kMergeTolerance);
    const ColumnOrder order = cluster_order(m);

    bool same = order.merges.size() == oracle.merges.size() && order.permutation == oracle.leaves;
    for (std::size_t k = 0; same && k < order.merges.size(); ++k) {
      const Merge& a = order.merges[k];
      const Merge& b = oracle.merges[k];
      same = a.left == b.left && a.right == b.right && std::abs(a.distance - b.distance) <= kMergeTolerance;
    }
    trace_miss += !same;

    // Every class of identical columns sits in one contiguous run.
    std::map<std::vector<bool>, std::vector<std::size_t>> positions;
    for (std::size_t p = 0; p < cols; ++p) positions[columns[order.permutation[p]]].push_back(p);
    std::vector<bool> in_run(cols, false);
    for (const ColumnRun& r : order.identical_runs) {
      for (std::size_t p = r.begin; p < r.end; ++p) in_run[p] = true;
    }
    for (const auto& [_, ps] : positions) {
      if (ps.size() < 2) continue;
      split_runs += ps.back() - ps.front() + 1 != ps.size();
    }
    const std::vector<Image> images = render(m, order, cols);
    for (std::size_t p = 0; p < cols; ++p) {
      const std::size_t col = order.permutation[p];
      for (std::size_t r = 0; r < rows; ++r) {
        const auto px = images[0].pixel(p, r);
        std::array<std::uint8_t, 3> want{255, 255, 255};
        if (columns[col][r]) want = positions[columns[col]].size() >= 2 ? std::array<std::uint8_t, 3>{255, 0, 0}
                                                                         : std::array<std::uint8_t, 3>{0, 0, 0};
        red_miss += px != want;
      }
    }
  }
  const double elapsed = seconds_since(start);
  o.require(trace_miss == 0, fmt::format("200 matrices: merge trace and leaf order equal the naive oracle ({} differ)", trace_miss));
  o.require(split_runs == 0, fmt::format("identical columns adjacent ({} split classes)", split_runs));
  o.require(red_miss == 0, fmt::format("pixels black/white/red as expected ({} wrong)", red_miss));
  o.require(elapsed < kClusterSeconds, fmt::format("runtime {:.2f} s < {:g} s", elapsed, kClusterSeconds));
  return o;
}

BaselineSpec month_baseline(std::uint64_t seed) {
  BaselineSpec b;
  b.relay_count = 3000;
  b.hourly_join_rate = 0.02;
  b.hourly_leave_rate = 0.02;
  b.duration_hours = 720;
  b.rng_seed = seed;
  return b;
}

struct MonthTimings {
  double uptime = 0.0;
  double fingerprints = 0.0;
  std::size_t columns = 0;
};

Outcome detection(MonthTimings& month) {
  Outcome o;
  const auto start = Clock::now();
  constexpr std::size_t kJoinHour = 400;

  {
    SybilSpec group;
    group.group_size = 150;
    group.join_hour = kJoinHour;
    group.similarity.kind = Similarity::Kind::Clone;
    group.nickname = "11BX1371";
    const SynthResult r = generate(month_baseline(5001), {group});
    const std::vector<std::optional<Flag>> flags = {std::nullopt};
    const auto series = churn_series(r.consensuses, flags);
    const auto found = alerts(series[0], kDetectionThreshold, kDetectionWindow);
    const Timestamp injected = r.consensuses[kJoinHour].valid_after();
    bool at_injection = false;
    std::set<Timestamp> elsewhere;
    for (const Alert& a : found) {
      if (a.timestamp == injected && a.direction == Direction::New) at_injection = true;
      if (a.timestamp != injected) elsewhere.insert(a.timestamp);
    }
    o.require(at_injection, fmt::format("new-relay alert at the injection hour {}", format_iso8601(injected)));
    o.require(elsewhere.empty(), fmt::format("no alerts at other hours (threshold {:g}, window {}): {} of {} other hours alert",
                                             kDetectionThreshold, kDetectionWindow, elsewhere.size(),
                                             series[0].points.size() - 1));

    double sum_new = 0.0, sum_left = 0.0;
    std::size_t n = 0;
    for (const ChurnPoint& p : series[0].points) {
      if (p.timestamp == injected) {
        o.info(fmt::format("alpha_new at injection {:.4f}", *p.alpha_new));
        continue;
      }
      sum_new += p.alpha_new.value_or(0.0);
      sum_left += p.alpha_left.value_or(0.0);
      ++n;
    }
    o.info(fmt::format("baseline mean alpha_new {:.4f}, alpha_left {:.4f}; both exceed the {:g} threshold at hourly rate 0.02",
                       sum_new / static_cast<double>(n), sum_left / static_cast<double>(n), kDetectionThreshold));
  }

  {
    SybilSpec cycler;
    cycler.group_size = 88;
    cycler.fingerprint_churn = 24;
    const SynthResult r = generate(month_baseline(5002), {cycler});
    std::set<Fingerprint> truth;
    for (const GroundTruthEntry& e : r.ground_truth) truth.insert(e.fingerprint);
    std::set<Ipv4> cycler_addresses;
    for (const RouterStatus& s : r.consensuses.back()) {
      if (truth.contains(s.fingerprint)) cycler_addresses.insert(s.address);
    }

    const auto t0 = Clock::now();
    const auto records = track(r.consensuses);
    const auto top = top_changers(records, 88);
    month.fingerprints = seconds_since(t0);

    std::size_t hits = 0;
    for (const FingerprintRecord& rec : top) hits += cycler_addresses.contains(rec.address);
    o.require(cycler_addresses.size() == 88 && hits == 88,
              fmt::format("all 88 cycling addresses fill the top 88 of top_changers ({} found)", hits));
    if (!top.empty()) o.info(fmt::format("top entry has {} fingerprints", top.front().fingerprints.size()));

    const auto t1 = Clock::now();
    const UptimeMatrix m = build_matrix(r.consensuses);
    const ColumnOrder order = cluster_order(m);
    const auto images = render(m, order, 3000);
    month.uptime = seconds_since(t1);
    month.columns = m.cols();
  }

  const double elapsed = seconds_since(start);
  o.require(elapsed < kDetectionSeconds, fmt::format("runtime {:.1f} s < {:g} s", elapsed, kDetectionSeconds));
  return o;
}

Outcome neighbor_accuracy() {
  Outcome o;
  const auto start = Clock::now();
  BaselineSpec b;
  b.relay_count = 2000;
  b.duration_hours = 1;
  b.rng_seed = 6001;
  std::vector<SybilSpec> families;
  for (std::size_t i = 0; i < 20; ++i) {
    SybilSpec f;
    f.group_size = 3 + i % 8;
    f.similarity.kind = Similarity::Kind::Templated;
    families.push_back(f);
  }
  const SynthResult r = generate(b, families);
  std::vector<std::vector<Fingerprint>> groups;
  for (std::size_t g = 0; g < families.size(); ++g) groups.push_back(r.group_members(g));
  const auto scores = accuracy(groups, r.consensuses.back(), r.descriptors);

  double sum = 0.0;
  std::size_t perfect = 0;
  for (const MemberAccuracy& m : scores) {
    sum += m.accuracy;
    perfect += m.accuracy == 1.0;
  }
  const double mean = sum / static_cast<double>(scores.size());
  const double share = static_cast<double>(perfect) / static_cast<double>(scores.size());
  const double elapsed = seconds_since(start);
  o.info(fmt::format("{} searches over {} relays", scores.size(), r.consensuses.back().size()));
  o.require(mean >= kMinMeanAccuracy, fmt::format("mean accuracy {:.4f} >= {:g}", mean, kMinMeanAccuracy));
  o.require(share >= kMinPerfectShare, fmt::format("perfect searches {:.1f}% >= {:g}%", share * 100, kMinPerfectShare * 100));
  o.require(elapsed < kNeighborSeconds, fmt::format("runtime {:.1f} s < {:g} s", elapsed, kNeighborSeconds));
  return o;
}

Outcome performance(const MonthTimings& month) {
  Outcome o;
  {
    BaselineSpec b;
    b.relay_count = 7000;
    b.duration_hours = 2;
    b.hourly_join_rate = 0.02;
    b.hourly_leave_rate = 0.02;
    b.rng_seed = 7001;
    const SynthResult r = generate(b, {});
    const auto t = Clock::now();
    const auto pair = churn_pair(r.consensuses[0], r.consensuses[1]);
    const double s = seconds_since(t);
    o.require(s < kChurnPairSeconds, fmt::format("churn pair over {} relays: {:.4f} s < {:g} s (alpha_new {:.4f})",
                                                 r.consensuses[1].size(), s, kChurnPairSeconds, pair.first));
  }
  {
    BaselineSpec b;
    b.relay_count = 6942;
    b.duration_hours = 1;
    b.rng_seed = 7002;
    const SynthResult r = generate(b, {});
    const Consensus& c = r.consensuses.back();
    const auto t = Clock::now();
    const auto ranking = nearest(c.statuses().front().fingerprint, c, r.descriptors, 10);
    const double s = seconds_since(t);
    o.require(s < kSearchSeconds && ranking.entries.size() == 10,
              fmt::format("neighbor search over {} relays: {:.3f} s < {:g} s", c.size(), s, kSearchSeconds));
  }
  o.require(month.uptime < kUptimeMonthSeconds,
            fmt::format("uptime month (720 rows x {} relays): {:.1f} s < {:g} s", month.columns, month.uptime,
                        kUptimeMonthSeconds));
  o.require(month.fingerprints < kFingerprintMonthSeconds,
            fmt::format("fingerprint month: {:.2f} s < {:g} s", month.fingerprints, kFingerprintMonthSeconds));
  return o;
}

template <class F>
std::optional<std::size_t> error_line(F&& f) {
  try {
    f();
  } catch (const MalformedDocument& e) {
    return e.line();
  }
  return std::nullopt;
}

Outcome round_trip() {
  Outcome o;
  std::mt19937_64 rng(8001);
  std::size_t differ = 0;
  for (int doc = 0; doc < 500; ++doc) {
    std::string first, second;
    if (doc % 2 == 0) {
      std::vector<RouterStatus> statuses;
      const std::size_t n = rng() % 40;
      for (std::size_t i = 0; i < n; ++i) statuses.push_back(random_status(rng));
      first = serialize_consensus(Consensus(hour(static_cast<long>(doc)), std::move(statuses)));
      second = serialize_consensus(parse_consensus(first));
    } else {
      first = serialize_descriptor(random_descriptor(rng));
      second = serialize_descriptor(parse_descriptor(first));
    }
    differ += first != second;
  }
  o.require(differ == 0, fmt::format("500 documents serialize-parse-serialize byte-identical ({} differ)", differ));

  const fs::path dir(SYBILSCOPE_FIXTURES);
  const std::vector<std::tuple<std::string, bool, std::size_t>> malformed = {
      {"consensus-bad-arity.txt", true, 6},
      {"consensus-bad-identity.txt", true, 3},
      {"consensus-no-valid-after.txt", true, 4},
      {"descriptor-bad-uptime.txt", false, 5},
  };
  for (const auto& [name, is_consensus, line] : malformed) {
    const std::string text = slurp(dir / name);
    const auto got = error_line([&] {
      if (is_consensus) {
        parse_consensus(text);
      } else {
        parse_descriptor(text);
      }
    });
    o.require(got == line, fmt::format("{} fails at line {} (got {})", name, line,
                                       got ? std::to_string(*got) : std::string("no error")));
  }
  return o;
}

Outcome determinism() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "sybilscope-acceptance-determinism";
  fs::remove_all(root);
  BaselineSpec b;
  b.relay_count = 400;
  b.duration_hours = 96;
  b.hourly_join_rate = 0.02;
  b.hourly_leave_rate = 0.02;
  b.rng_seed = 9001;
  SybilSpec group;
  group.group_size = 20;
  group.join_hour = 30;
  group.uptime.kind = UptimePattern::Kind::Diurnal;
  SybilSpec cycler;
  cycler.group_size = 5;
  cycler.fingerprint_churn = 12;
  write_synth_output(generate(b, {group, cycler}), root / "in");

  RunConfig c;
  c.inputs = {root / "in"};
  c.modules = {Module::Churn, Module::Uptime, Module::Fingerprints, Module::Neighbors};
  c.neighbors.groups = root / "in" / "ground-truth.csv";
  c.uptime.image_width = 256;
  std::vector<RunResult> runs;
  for (unsigned threads : {1U, 4U, 1U}) {
    c.threads = threads;
    c.out = root / fmt::format("out{}", runs.size());
    runs.push_back(run(c));
  }
  bool ok = true;
  std::size_t compared = 0;
  for (const RunResult& r : runs) ok = ok && r.exit_code != kExitFatal;
  o.require(ok, "all runs completed");
  for (std::size_t k = 1; ok && k < runs.size(); ++k) {
    if (runs[k].artifacts.size() != runs[0].artifacts.size()) {
      ok = false;
      break;
    }
    for (const fs::path& p : runs[0].artifacts) {
      ok = ok && slurp(p) == slurp(root / fmt::format("out{}", k) / p.filename());
      ++compared;
    }
  }
  std::size_t ppm = 0;
  for (const fs::path& p : runs[0].artifacts) ppm += p.extension() == ".ppm";
  o.require(ok && ppm > 0, fmt::format("3 runs (1, 4, 1 threads): {} artifact comparisons byte-identical, {} PPM per run",
                                       compared, ppm));
  fs::remove_all(root);
  return o;
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::off);
  report(1, "churn ratios equal the set-complement oracle", churn_oracle());
  report(2, "Levenshtein example and metric properties", levenshtein_metric());
  report(3, "onion prefix collision cost", prefix_cost());
  report(4, "single-linkage clustering and identical-run rendering", clustering());
  MonthTimings month;
  report(5, "end-to-end detection on a synthetic month", detection(month));
  report(6, "nearest-neighbor family accuracy", neighbor_accuracy());
  report(7, "performance envelopes", performance(month));
  report(8, "parser round trip and malformed fixtures", round_trip());
  report(9, "byte-identical pipeline re-runs", determinism());
  fmt::print("{} of 9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
