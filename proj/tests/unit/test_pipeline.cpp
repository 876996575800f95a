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
#include <sstream>

#include "builders.hpp"
#include "sybilscope/csv.hpp"
#include "sybilscope/pipeline.hpp"
#include "sybilscope/synth.hpp"

using namespace sybilscope;
using namespace sybilscope::testing;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) rows.push_back(csv_split(line));
  return rows;
}

struct Scratch {
  fs::path root;
  explicit Scratch(const std::string& name) : root(fs::temp_directory_path() / name) {
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Scratch() { fs::remove_all(root); }
};

fs::path write_stream(const fs::path& dir, const BaselineSpec& b, const std::vector<SybilSpec>& sybils) {
  write_synth_output(generate(b, sybils), dir);
  return dir;
}

BaselineSpec still(std::size_t relays, std::size_t hours) {
  BaselineSpec b;
  b.relay_count = relays;
  b.duration_hours = hours;
  return b;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("csv helpers") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_split("a,\"b,c\",\"d\"\"e\",") == std::vector<std::string>{"a", "b,c", "d\"e", ""});
  CHECK(format_ratio(1.0 / 3.0) == "0.333333");
  CHECK(format_ratio(-0.0) == "0.000000");
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"x", "y,z"});
  CHECK(out.str() == "x,\"y,z\"\n");
}

TEST_CASE("module names") {
  for (Module m : {Module::Churn, Module::Uptime, Module::Fingerprints, Module::Neighbors, Module::Synth}) {
    CHECK(parse_module(module_name(m)) == m);
  }
  CHECK_FALSE(parse_module("nope"));
}

TEST_CASE("churn over three consensuses is clean") {
  Scratch s("sybilscope-pipe-clean");
  RunConfig c;
  c.inputs = {write_stream(s.root / "in", still(50, 3), {})};
  c.modules = {Module::Churn};
  c.churn.flags = {std::nullopt, Flag::Running};
  c.out = s.root / "out";
  const RunResult r = run(c);
  CHECK(r.exit_code == kExitClean);
  const auto rows = read_csv(c.out / "churn.csv");
  REQUIRE(rows.size() == 1 + 2 * 2);
  CHECK(rows[0] == std::vector<std::string>{"timestamp", "flag", "alpha_new", "alpha_left", "smoothed_new",
                                            "smoothed_left", "alert"});
  CHECK(rows[1][0] == "2015-10-01T01:00:00");
  CHECK(rows[1][1] == "");
  CHECK(rows[3][1] == "Running");
  CHECK(rows[1][6] == "0");
  CHECK(fs::exists(c.out / "churn-sweep-all.csv"));
  CHECK(fs::exists(c.out / "churn-sweep-Running.csv"));
  CHECK(fs::exists(c.out / "new-fingerprints.csv"));
}

TEST_CASE("an injected spike raises an alert and the alert exit code") {
  Scratch s("sybilscope-pipe-spike");
  SybilSpec g;
  g.group_size = 30;
  g.join_hour = 5;
  RunConfig c;
  c.inputs = {write_stream(s.root / "in", still(100, 10), {g})};
  c.modules = {Module::Churn};
  c.out = s.root / "out";
  const RunResult r = run(c);
  CHECK(r.exit_code == kExitAlerts);
  CHECK(r.alerts == 1);
  const auto rows = read_csv(c.out / "churn.csv");
  std::size_t alert_rows = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i][6] == "1") {
      ++alert_rows;
      CHECK(rows[i][0] == "2015-10-01T05:00:00");
      CHECK(rows[i][2] == format_ratio(30.0 / 130.0));
    }
  }
  CHECK(alert_rows == 1);
}

TEST_CASE("gaps become GAP rows and date bounds are inclusive") {
  Scratch s("sybilscope-pipe-gap");
  const SynthResult stream = generate(still(20, 8), {});
  fs::create_directories(s.root / "in");
  for (std::size_t h : {0, 1, 2, 5, 6, 7}) {
    std::ofstream(s.root / "in" / std::to_string(h)) << serialize_consensus(stream.consensuses[h]);
  }
  RunConfig c;
  c.inputs = {s.root / "in"};
  c.modules = {Module::Churn};
  c.out = s.root / "out";
  c.from = hour(1);
  c.to = hour(6);
  CHECK(run(c).exit_code == kExitClean);
  const auto rows = read_csv(c.out / "churn.csv");
  REQUIRE(rows.size() == 1 + 3);
  CHECK(rows[1][0] == "2015-10-01T02:00:00");
  CHECK(rows[2][0] == "2015-10-01T02:00:00/2015-10-01T05:00:00");
  CHECK(rows[2][2] == "GAP");
  CHECK(rows[3][0] == "2015-10-01T06:00:00");
}

TEST_CASE("fatal errors") {
  Scratch s("sybilscope-pipe-fatal");
  RunConfig c;
  c.modules = {Module::Churn};
  c.out = s.root / "out";
  c.inputs = {s.root / "missing"};
  RunResult r = run(c);
  CHECK(r.exit_code == kExitFatal);
  CHECK_FALSE(r.error.empty());

  fs::create_directories(s.root / "junk");
  std::ofstream(s.root / "junk" / "x") << "not a directory document\n";
  c.inputs = {s.root / "junk"};
  CHECK(run(c).exit_code == kExitFatal);

  c.modules.clear();
  CHECK(run(c).exit_code == kExitFatal);
}

TEST_CASE("corrupt documents are skipped and counted") {
  Scratch s("sybilscope-pipe-corrupt");
  write_stream(s.root / "in", still(10, 3), {});
  std::ofstream(s.root / "in" / "broken") << "network-status-version 3\nvalid-after 2015-10-02 00:00:00\nr bad\n";
  RunConfig c;
  c.inputs = {s.root / "in"};
  c.modules = {Module::Fingerprints};
  c.out = s.root / "out";
  const RunResult r = run(c);
  CHECK(r.exit_code == kExitClean);
  CHECK(r.skipped_documents == 1);
}

TEST_CASE("uptime, fingerprints, neighbors and suspects") {
  Scratch s("sybilscope-pipe-all");
  SybilSpec family;
  family.group_size = 6;
  family.join_hour = 3;
  family.uptime = {UptimePattern::Kind::Diurnal, 9, 15};
  family.nickname = "Family";
  SybilSpec cycler;
  cycler.group_size = 3;
  cycler.fingerprint_churn = 5;
  BaselineSpec b = still(60, 30);
  b.hourly_join_rate = 0.02;
  b.hourly_leave_rate = 0.02;
  const SynthResult truth = generate(b, {family, cycler});
  write_synth_output(truth, s.root / "in");

  RunConfig c;
  c.inputs = {s.root / "in"};
  c.modules = {Module::Uptime, Module::Fingerprints, Module::Neighbors};
  c.neighbors.seed = "Family000";
  c.neighbors.top = 5;
  c.neighbors.groups = s.root / "in" / "ground-truth.csv";
  c.fingerprints.top = 3;
  c.uptime.image_width = 40;
  c.out = s.root / "out";
  c.to = hour(27);  // family online at its last hour
  const RunResult r = run(c);
  REQUIRE(r.exit_code == kExitClean);

  const auto columns = read_csv(c.out / "uptime-2015-10-01-columns.csv");
  CHECK(columns[0] == std::vector<std::string>{"chunk", "x", "column", "fingerprint", "online_hours", "identical"});
  const std::size_t relays = columns.size() - 1;
  std::size_t images = 0;
  for (const auto& p : r.artifacts) images += p.extension() == ".ppm";
  CHECK(images == (relays + 39) / 40);
  CHECK(slurp(c.out / "uptime-2015-10-01-0.ppm").starts_with("P6\n40 28\n255\n"));

  const auto fps = read_csv(c.out / "fingerprints.csv");
  CHECK(fps[1][1] == "5");
  CHECK(fps[1][5].size() == 5 * 40 + 4);

  const auto nb = read_csv(c.out / "neighbors.csv");
  REQUIRE(nb.size() == 1 + 1 + 5);
  CHECK(nb[1][2] == "Family000");
  for (std::size_t i = 2; i < nb.size(); ++i) CHECK(nb[i][2].starts_with("Family00"));

  const auto acc = read_csv(c.out / "neighbors-accuracy.csv");
  CHECK(acc.size() == 1 + 6 + 3);  // cycler group scores its current fingerprints

  const auto suspects = read_csv(c.out / "suspects.csv");
  std::size_t family_hits = 0;
  for (std::size_t i = 1; i < suspects.size(); ++i) {
    family_hits += suspects[i][1].starts_with("Family");
    CHECK(std::stoul(suspects[i][2]) >= 2);
  }
  CHECK(family_hits == 6);
}

TEST_CASE("re-runs are byte identical") {
  Scratch s("sybilscope-pipe-det");
  SybilSpec g;
  g.group_size = 8;
  g.join_hour = 4;
  BaselineSpec b = still(80, 24);
  b.hourly_join_rate = 0.03;
  b.hourly_leave_rate = 0.03;
  write_synth_output(generate(b, {g}), s.root / "in");
  RunConfig c;
  c.inputs = {s.root / "in"};
  c.modules = {Module::Churn, Module::Uptime, Module::Fingerprints};
  c.threads = 4;
  c.out = s.root / "a";
  const RunResult first = run(c);
  c.out = s.root / "b";
  c.threads = 1;
  const RunResult second = run(c);
  REQUIRE(first.artifacts.size() == second.artifacts.size());
  for (const auto& p : first.artifacts) CHECK(slurp(p) == slurp(s.root / "b" / p.filename()));
}

}  // TEST_SUITE
