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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "builders.hpp"
#include "sybilscope/churn.hpp"
#include "sybilscope/error.hpp"
#include "sybilscope/fingerprint.hpp"
#include "sybilscope/sources.hpp"
#include "sybilscope/synth.hpp"
#include "sybilscope/uptime.hpp"

using namespace sybilscope;
using namespace sybilscope::testing;

namespace {

BaselineSpec quiet(std::size_t relays, std::size_t hours) {
  BaselineSpec b;
  b.relay_count = relays;
  b.duration_hours = hours;
  b.rng_seed = 5;
  return b;
}

std::string serialize_all(const SynthResult& r) {
  std::string out;
  for (const Consensus& c : r.consensuses) out += serialize_consensus(c);
  for (const auto& [_, d] : r.descriptors) out += serialize_descriptor(d);
  return out;
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("zero rates give an unchanging network") {
  const SynthResult r = generate(quiet(200, 10), {});
  REQUIRE(r.consensuses.size() == 10);
  for (std::size_t i = 0; i < r.consensuses.size(); ++i) {
    CHECK(r.consensuses[i].size() == 200);
    CHECK(r.consensuses[i].valid_after() == hour(static_cast<long>(i)));
    CHECK(r.consensuses[i].statuses().size() == r.consensuses[0].statuses().size());
  }
  const std::vector<std::optional<Flag>> flags = {std::nullopt};
  const auto series = churn_series(r.consensuses, flags);
  for (const ChurnPoint& p : series[0].points) {
    CHECK(p.alpha_new == 0.0);
    CHECK(p.alpha_left == 0.0);
  }
  CHECK(r.ground_truth.empty());
}

TEST_CASE("a group of half the network size spikes churn at its join hour") {
  SybilSpec g;
  g.group_size = 100;
  g.join_hour = 4;
  const SynthResult r = generate(quiet(200, 8), {g});
  const std::vector<std::optional<Flag>> flags = {std::nullopt};
  const auto series = churn_series(r.consensuses, flags)[0];
  for (const ChurnPoint& p : series.points) {
    if (p.timestamp == hour(4)) {
      CHECK(*p.alpha_new == doctest::Approx(100.0 / 300.0).epsilon(1e-15));
    } else {
      CHECK(p.alpha_new == 0.0);
    }
  }
  CHECK(r.group_members(0).size() == 100);
}

TEST_CASE("diurnal group shows nine hours on, fifteen off") {
  SybilSpec g;
  g.group_size = 6;
  g.uptime.kind = UptimePattern::Kind::Diurnal;
  g.similarity.kind = Similarity::Kind::Clone;
  const SynthResult r = generate(quiet(50, 72), {g});
  const UptimeMatrix m = build_matrix(r.consensuses);
  const auto members = r.group_members(0);
  std::set<Fingerprint> group(members.begin(), members.end());
  std::vector<bool> expected(72);
  for (std::size_t h = 0; h < 72; ++h) expected[h] = h % 24 < 9;
  std::size_t matched = 0;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    if (!group.contains(m.relays()[c])) continue;
    CHECK(m.column(c) == expected);
    ++matched;
  }
  CHECK(matched == 6);
  const ColumnOrder o = cluster_order(m);
  bool run_of_six = false;
  for (const ColumnRun& run : o.identical_runs) run_of_six = run_of_six || (run.size() == 6 && group.contains(m.relays()[o.permutation[run.begin]]));
  CHECK(run_of_six);
}

TEST_CASE("step pattern has one outage") {
  SybilSpec g;
  g.group_size = 2;
  g.join_hour = 2;
  g.leave_hour = 20;
  g.uptime = {UptimePattern::Kind::Step, 5, 4};
  const SynthResult r = generate(quiet(10, 24), {g});
  const Fingerprint member = r.group_members(0).front();
  for (std::size_t h = 0; h < 24; ++h) {
    const bool expect = h >= 2 && h < 20 && !(h >= 7 && h < 11);
    CHECK(r.consensuses[h].contains(member) == expect);
  }
}

TEST_CASE("fingerprint cycling keeps addresses") {
  SybilSpec g;
  g.group_size = 8;
  g.fingerprint_churn = 24;
  const SynthResult r = generate(quiet(100, 48), {g});
  CHECK(r.ground_truth.size() == 8 * 24);
  const auto top = top_changers(track(r.consensuses), 8);
  for (const FingerprintRecord& rec : top) CHECK(rec.fingerprints.size() == 24);
  std::set<Fingerprint> truth;
  for (const auto& e : r.ground_truth) truth.insert(e.fingerprint);
  for (const FingerprintRecord& rec : top) {
    for (const Fingerprint& f : rec.fingerprints) CHECK(truth.contains(f));
  }
}

TEST_CASE("templated and clone similarity") {
  SybilSpec t;
  t.group_size = 12;
  t.nickname = "AccessNow";
  t.contact = "noc AT example dot org";
  SybilSpec c;
  c.group_size = 3;
  c.similarity.kind = Similarity::Kind::Clone;
  c.nickname = "default";
  c.or_port = 443;
  c.dir_port = 9030;
  const SynthResult r = generate(quiet(20, 2), {t, c});
  const Consensus& last = r.consensuses.back();
  const auto tm = r.group_members(0);
  for (std::size_t i = 0; i < tm.size(); ++i) {
    const RouterStatus* s = last.find(tm[i]);
    REQUIRE(s);
    CHECK(s->nickname == (i < 10 ? "AccessNow00" : "AccessNow0") + std::to_string(i));
    CHECK(s->address.value() == last.find(tm[0])->address.value() + i);
    CHECK(r.descriptors.at(tm[i]).contact == "noc AT example dot org");
  }
  for (const Fingerprint& f : r.group_members(1)) {
    const RouterStatus* s = last.find(f);
    CHECK(s->nickname == "default");
    CHECK(s->or_port == 443);
    CHECK(s->dir_port == 9030);
  }
}

TEST_CASE("same seed, same bytes") {
  BaselineSpec b = quiet(300, 30);
  b.hourly_join_rate = 0.05;
  b.hourly_leave_rate = 0.05;
  SybilSpec g;
  g.group_size = 10;
  g.join_hour = 3;
  g.similarity.kind = Similarity::Kind::Diversified;
  const std::string a = serialize_all(generate(b, {g}));
  CHECK(a == serialize_all(generate(b, {g})));
  b.rng_seed = 6;
  CHECK(a != serialize_all(generate(b, {g})));
}

TEST_CASE("fingerprints and addresses never collide") {
  BaselineSpec b = quiet(500, 48);
  b.hourly_join_rate = 0.1;
  b.hourly_leave_rate = 0.1;
  b.fresh_join_fraction = 0.5;
  const SynthResult r = generate(b, {});
  for (const Consensus& c : r.consensuses) {
    std::set<std::uint32_t> addresses;
    for (const RouterStatus& s : c) addresses.insert(s.address.value());
    CHECK(addresses.size() == c.size());
  }
}

TEST_CASE("contradictory specs are rejected") {
  SybilSpec g;
  g.group_size = 1;
  CHECK_THROWS_AS(generate(quiet(10, 10), {g}), SpecError);
  g.group_size = 2;
  g.join_hour = 10;
  CHECK_THROWS_AS(generate(quiet(10, 10), {g}), SpecError);
  g.join_hour = 5;
  g.leave_hour = 5;
  CHECK_THROWS_AS(generate(quiet(10, 10), {g}), SpecError);
  g.leave_hour = 11;
  CHECK_THROWS_AS(generate(quiet(10, 10), {g}), SpecError);
  g.leave_hour = 8;
  g.fingerprint_churn = 4;
  CHECK_THROWS_AS(generate(quiet(10, 10), {g}), SpecError);
  g.fingerprint_churn = 3;
  CHECK_NOTHROW(generate(quiet(10, 10), {g}));
  BaselineSpec bad = quiet(10, 10);
  bad.hourly_join_rate = 1.5;
  CHECK_THROWS_AS(generate(bad, {}), SpecError);
  bad = quiet(0, 10);
  CHECK_THROWS_AS(generate(bad, {}), SpecError);
}

TEST_CASE("spec file format") {
  const SynthConfig c = parse_synth_spec(R"(# baseline
relay_count = 3000
join_rate = 0.02
leave_rate=0.02
duration_hours = 720
seed = 99
start = 2015-11-01
flag.Exit = 0.5

sybil.2.size = 88
sybil.2.fingerprint_churn = 24
sybil.10.size = 9
sybil.1.size = 150
sybil.1.join = 200
sybil.1.pattern = diurnal
sybil.1.on_hours = 9
sybil.1.off_hours = 15
sybil.1.similarity = clone
sybil.1.nickname = 11BX1371
sybil.1.or_port = 443
)");
  CHECK(c.baseline.relay_count == 3000);
  CHECK(c.baseline.hourly_join_rate == 0.02);
  CHECK(c.baseline.hourly_leave_rate == 0.02);
  CHECK(c.baseline.duration_hours == 720);
  CHECK(c.baseline.rng_seed == 99);
  CHECK(format_date(c.baseline.start) == "2015-11-01");
  CHECK(c.baseline.flag_probabilities.at(Flag::Exit) == 0.5);
  REQUIRE(c.sybils.size() == 3);
  CHECK(c.sybils[0].group_size == 150);
  CHECK(c.sybils[0].uptime.kind == UptimePattern::Kind::Diurnal);
  CHECK(c.sybils[0].similarity.kind == Similarity::Kind::Clone);
  CHECK(c.sybils[0].nickname == "11BX1371");
  CHECK(c.sybils[0].or_port == 443);
  CHECK(c.sybils[1].fingerprint_churn == 24);
  CHECK(c.sybils[2].group_size == 9);

  CHECK_THROWS_AS(parse_synth_spec("relay_count = many\n"), SpecError);
  CHECK_THROWS_AS(parse_synth_spec("bogus = 1\n"), SpecError);
  CHECK_THROWS_AS(parse_synth_spec("seed = 1\nseed = 2\n"), SpecError);
  CHECK_THROWS_AS(parse_synth_spec("sybil.1.pattern = wave\n"), SpecError);
  CHECK_THROWS_AS(parse_synth_spec("just text\n"), SpecError);
  try {
    parse_synth_spec("seed = 1\n\n# c\nflag.Nope = 1\n");
  } catch (const SpecError& e) {
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
}

TEST_CASE("written output parses back") {
  SybilSpec g;
  g.group_size = 4;
  g.join_hour = 1;
  BaselineSpec b = quiet(30, 5);
  b.hourly_join_rate = 0.1;
  b.hourly_leave_rate = 0.1;
  const SynthResult r = generate(b, {g});
  const auto dir = std::filesystem::temp_directory_path() / "sybilscope-synth-test";
  std::filesystem::remove_all(dir);
  const auto files = write_synth_output(r, dir);
  CHECK(files.size() == 5 + 2);
  CHECK(std::filesystem::exists(dir / "consensuses" / "2015-10-01-00-00-00-consensus"));
  const Corpus corpus = load_corpus(read_documents({dir}), 2);
  CHECK(corpus.skipped_documents == 0);
  REQUIRE(corpus.consensuses.size() == r.consensuses.size());
  for (std::size_t i = 0; i < r.consensuses.size(); ++i) CHECK(corpus.consensuses[i] == r.consensuses[i]);
  CHECK(corpus.descriptors == r.descriptors);
  std::ifstream truth(dir / "ground-truth.csv");
  std::string header;
  std::getline(truth, header);
  CHECK(header == "group_id,fingerprint");
  std::size_t rows = 0;
  for (std::string line; std::getline(truth, line);) ++rows;
  CHECK(rows == 4);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
