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

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "sybilscope/fingerprint.hpp"
#include "sybilscope/pipeline.hpp"

namespace {

using namespace sybilscope;

struct Options {
  RunConfig config;
  std::string from;
  std::string to;
  std::string nickname;
  std::string nickname_contains;
  std::string filter_flag;
  std::vector<std::string> churn_flags;
  std::vector<std::string> modules;
  int prefix_digits = 0;
  double hash_rate = 0.0;
};

void add_churn_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--threshold", o.config.churn.threshold, "Alert threshold on the smoothed ratio")
      ->capture_default_str();
  cmd->add_option("--window", o.config.churn.windows,
                  "Moving-average windows; the first drives churn.csv, all feed the sweep")
      ->capture_default_str();
  cmd->add_option("--flag", o.churn_flags, "Restrict churn to a flag (repeatable; 'all' = every relay)");
  cmd->add_option("--sweep-threshold", o.config.churn.sweep_thresholds, "Thresholds for the sweep CSV");
  cmd->add_option("--new-threshold", o.config.churn.new_fingerprint_threshold,
                  "Unseen fingerprints per consensus that raise an alert")
      ->capture_default_str();
}

void add_uptime_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--image-width", o.config.uptime.image_width, "Maximum columns per image")
      ->capture_default_str();
}

void add_fingerprint_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--top", o.config.fingerprints.top, "Addresses shown in the table")->capture_default_str();
  cmd->add_option("--prefix-digits", o.prefix_digits, "Also print the cost of an n-digit onion prefix match")
      ->check(CLI::Range(1, 16));
  cmd->add_option("--hash-rate", o.hash_rate, "Hashes per second for --prefix-digits")
      ->check(CLI::PositiveNumber);
}

void add_neighbor_options(CLI::App* cmd, Options& o, bool top) {
  cmd->add_option("--seed", o.config.neighbors.seed, "Seed relay fingerprint or nickname");
  if (top) cmd->add_option("--top", o.config.neighbors.top, "Neighbours to report")->capture_default_str();
  cmd->add_option("--groups", o.config.neighbors.groups, "Ground-truth CSV (group_id,fingerprint) for accuracy");
}

void add_synth_options(CLI::App* cmd, Options& o, bool required) {
  auto* opt = cmd->add_option("--spec", o.config.synth.spec, "Synthetic stream spec file");
  if (required) opt->required();
}

Timestamp parse_bound(const std::string& text, bool end_of_day) {
  if (auto ts = parse_timestamp(text)) return *ts;
  if (auto day = parse_date(text)) {
    return end_of_day ? *day + std::chrono::hours(24) - std::chrono::seconds(1) : *day;
  }
  throw CLI::ValidationError("date", "expected YYYY-MM-DD or 'YYYY-MM-DD HH:MM:SS', got '" + text + "'");
}

Flag parse_flag_arg(const std::string& text, const std::string& what) {
  auto flag = parse_flag(text);
  if (!flag) throw CLI::ValidationError(what, "unknown flag '" + text + "'");
  return *flag;
}

void finish_config(Options& o) {
  RunConfig& c = o.config;
  if (!o.from.empty()) c.from = parse_bound(o.from, false);
  if (!o.to.empty()) c.to = parse_bound(o.to, true);
  if (!o.nickname.empty() && !o.nickname_contains.empty()) {
    throw CLI::ValidationError("--filter-nickname", "use either --filter-nickname or --filter-nickname-contains");
  }
  if (!o.nickname.empty()) c.filter.nickname = o.nickname;
  if (!o.nickname_contains.empty()) {
    c.filter.nickname = o.nickname_contains;
    c.filter.nickname_match = FilterSpec::NicknameMatch::Substring;
  }
  if (!o.filter_flag.empty()) c.filter.flag = parse_flag_arg(o.filter_flag, "--filter-flag");
  if (!o.churn_flags.empty()) {
    c.churn.flags.clear();
    for (const std::string& f : o.churn_flags) {
      c.churn.flags.push_back(f == "all" ? std::nullopt : std::optional<Flag>(parse_flag_arg(f, "--flag")));
    }
  }
  for (const std::string& m : o.modules) {
    auto module = parse_module(m);
    if (!module) throw CLI::ValidationError("--modules", "unknown module '" + m + "'");
    c.modules.insert(*module);
  }
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("sybilscope");
  logger->set_pattern("%^[%l]%$ %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("SYBILSCOPE_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off") {
      spdlog::warn("unknown SYBILSCOPE_LOG level '{}'", env);
    } else {
      spdlog::set_level(level);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  Options o;
  CLI::App app{"Sybil relay detection over Tor directory archives", "sybilscope"};
  app.require_subcommand(1);
  app.fallthrough();

  auto& c = o.config;
  app.add_option("--input,-i", c.inputs, "Consensus/descriptor files, directories or tar(.xz) archives");
  app.add_option("--from", o.from, "First valid-after to include (inclusive)");
  app.add_option("--to", o.to, "Last valid-after to include (inclusive)");
  app.add_option("--filter-nickname", o.nickname, "Keep relays with exactly this nickname");
  app.add_option("--filter-nickname-contains", o.nickname_contains, "Keep relays whose nickname contains this");
  app.add_option("--filter-flag", o.filter_flag, "Keep relays holding this flag");
  app.add_option("--filter-orport", c.filter.or_port, "Keep relays with this OR port");
  app.add_option("--filter-dirport", c.filter.dir_port, "Keep relays with this directory port");
  app.add_option("--filter-address", c.filter.address_prefix, "Keep relays in this CIDR block or text prefix");
  app.add_option("--filter-version", c.filter.version, "Keep relays whose version contains this");
  app.add_option("--out,-o", c.out, "Output directory")->capture_default_str();
  app.add_option("--threads", c.threads, "Worker threads (0 = all cores)")->capture_default_str();

  auto* churn = app.add_subcommand("churn", "Join/leave churn time series and alerts");
  add_churn_options(churn, o);
  auto* uptime = app.add_subcommand("uptime", "Clustered uptime matrix images");
  add_uptime_options(uptime, o);
  auto* fingerprints = app.add_subcommand("fingerprints", "Fingerprint changes per IPv4 address");
  add_fingerprint_options(fingerprints, o);
  auto* neighbors = app.add_subcommand("neighbors", "Nearest relays to a seed by configuration edit distance");
  add_neighbor_options(neighbors, o, true);
  auto* synth = app.add_subcommand("synth", "Generate a synthetic consensus stream with ground truth");
  add_synth_options(synth, o, true);
  auto* scan = app.add_subcommand("scan", "Run several modules over one stream and cross-reference suspects");
  scan->add_option("--modules", o.modules, "Modules to run (churn, uptime, fingerprints, neighbors, synth)")
      ->delimiter(',')
      ->required();
  add_churn_options(scan, o);
  add_uptime_options(scan, o);
  scan->add_option("--top", o.config.fingerprints.top, "Top-n for fingerprints and neighbors");
  add_neighbor_options(scan, o, false);
  add_synth_options(scan, o, false);

  try {
    app.parse(argc, argv);
    if (churn->parsed()) c.modules.insert(Module::Churn);
    if (uptime->parsed()) c.modules.insert(Module::Uptime);
    if (fingerprints->parsed()) c.modules.insert(Module::Fingerprints);
    if (neighbors->parsed()) c.modules.insert(Module::Neighbors);
    if (synth->parsed()) c.modules.insert(Module::Synth);
    if (scan->parsed()) c.neighbors.top = c.fingerprints.top;
    finish_config(o);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitFatal;
  }

  if (o.prefix_digits > 0) {
    const auto cost = prefix_collision_cost(o.prefix_digits, o.hash_rate > 0 ? std::optional(o.hash_rate) : std::nullopt);
    std::cout << fmt::format("prefix of {} digits: {:.6g} expected operations", o.prefix_digits, cost.expected_ops);
    if (cost.expected_seconds) std::cout << fmt::format(", {:.6g} s", *cost.expected_seconds);
    std::cout << '\n';
  }

  const RunResult result = run(c);
  for (const std::string& line : result.report) std::cout << line << '\n';
  if (result.exit_code == kExitFatal) {
    std::cerr << "error: " << result.error << '\n';
    return kExitFatal;
  }
  std::cout << fmt::format("{} alert(s), {} document(s) skipped, {} artifact(s) in {}\n", result.alerts,
                           result.skipped_documents, result.artifacts.size(), c.out.string());
  return result.exit_code;
}
