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

#include "sybilscope/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <map>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "sybilscope/csv.hpp"
#include "sybilscope/error.hpp"
#include "sybilscope/fingerprint.hpp"
#include "sybilscope/neighbors.hpp"
#include "sybilscope/sources.hpp"
#include "sybilscope/synth.hpp"
#include "sybilscope/uptime.hpp"

namespace sybilscope {
namespace fs = std::filesystem;

namespace {

constexpr std::array<std::pair<Module, std::string_view>, 5> kModuleNames = {{
    {Module::Churn, "churn"},
    {Module::Uptime, "uptime"},
    {Module::Fingerprints, "fingerprints"},
    {Module::Neighbors, "neighbors"},
    {Module::Synth, "synth"},
}};

const std::vector<double> kDefaultSweep = {0.004, 0.006, 0.008, 0.010, 0.012, 0.014,
                                           0.016, 0.018, 0.020, 0.025, 0.030, 0.040};

struct ModuleOutput {
  std::vector<fs::path> artifacts;
  std::vector<std::string> report;
  std::size_t alerts = 0;
  std::set<Fingerprint> flagged;
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::string opt_ratio(const std::optional<double>& v) { return v ? format_ratio(*v) : std::string(); }

std::string flag_label(const std::optional<Flag>& flag) {
  return flag ? std::string(flag_name(*flag)) : std::string();
}

std::string nickname_of(const Fingerprint& fp, std::span<const Consensus> stream) {
  for (auto it = stream.rbegin(); it != stream.rend(); ++it) {
    if (const RouterStatus* s = it->find(fp)) return s->nickname;
  }
  return {};
}

// Fingerprints that entered (or left) between two consensuses.
void collect_difference(const Consensus& a, const Consensus& b, std::optional<Flag> flag,
                        std::set<Fingerprint>& out) {
  for (const RouterStatus& s : a) {
    if (flag && !s.flags.has(*flag)) continue;
    const RouterStatus* other = b.find(s.fingerprint);
    if (!other || (flag && !other->flags.has(*flag))) out.insert(s.fingerprint);
  }
}

ModuleOutput run_churn(std::span<const Consensus> stream, const ChurnParams& p, const fs::path& out_dir) {
  if (p.windows.empty()) throw InvalidArgument("churn needs at least one window");
  if (p.threshold <= 0.0) throw InvalidArgument("churn threshold must be positive");
  ModuleOutput out;
  const std::size_t window = p.windows.front();
  const auto series = churn_series(stream, p.flags);

  std::map<Timestamp, std::size_t> index;
  for (std::size_t i = 0; i < stream.size(); ++i) index.emplace(stream[i].valid_after(), i);

  const fs::path churn_path = out_dir / "churn.csv";
  {
    auto file = open_out(churn_path);
    CsvWriter csv(file);
    csv.row({"timestamp", "flag", "alpha_new", "alpha_left", "smoothed_new", "smoothed_left", "alert"});
    for (const ChurnSeries& s : series) {
      const auto raw_new = s.alpha_new();
      const auto raw_left = s.alpha_left();
      const auto sm_new = smooth(std::span<const std::optional<double>>(raw_new), window);
      const auto sm_left = smooth(std::span<const std::optional<double>>(raw_left), window);
      const auto found = alerts(s, p.threshold, window);
      std::set<Timestamp> alert_times;
      for (const Alert& a : found) {
        alert_times.insert(a.timestamp);
        const std::size_t cur = index.at(a.timestamp);
        if (a.direction == Direction::New) {
          collect_difference(stream[cur], stream[cur - 1], s.flag, out.flagged);
        } else {
          collect_difference(stream[cur - 1], stream[cur], s.flag, out.flagged);
        }
        spdlog::debug("churn alert: {} {} {} smoothed={}", format_iso8601(a.timestamp), flag_label(s.flag),
                     direction_name(a.direction), format_ratio(a.value));
      }
      out.alerts += found.size();
      out.report.push_back(fmt::format("churn [{}] window={} threshold={}: {} points, {} gaps, {} alerts",
                                       s.flag ? flag_name(*s.flag) : "all", window, format_ratio(p.threshold),
                                       s.points.size(), s.gaps.size(), found.size()));

      std::size_t g = 0;
      for (std::size_t i = 0; i <= s.points.size(); ++i) {
        while (g < s.gaps.size() && (i == s.points.size() || s.gaps[g].to <= s.points[i].timestamp)) {
          csv.row({format_iso8601(s.gaps[g].from) + "/" + format_iso8601(s.gaps[g].to), flag_label(s.flag),
                   "GAP", "", "", "", ""});
          ++g;
        }
        if (i == s.points.size()) break;
        const ChurnPoint& pt = s.points[i];
        csv.row({format_iso8601(pt.timestamp), flag_label(s.flag), opt_ratio(pt.alpha_new),
                 opt_ratio(pt.alpha_left), opt_ratio(sm_new[i]), opt_ratio(sm_left[i]),
                 alert_times.contains(pt.timestamp) ? "1" : "0"});
      }
    }
  }
  out.artifacts.push_back(churn_path);

  const std::span<const double> thresholds =
      p.sweep_thresholds.empty() ? std::span<const double>(kDefaultSweep) : std::span<const double>(p.sweep_thresholds);
  for (const ChurnSeries& s : series) {
    const fs::path path = out_dir / fmt::format("churn-sweep-{}.csv", s.flag ? flag_name(*s.flag) : "all");
    auto file = open_out(path);
    CsvWriter csv(file);
    csv.row({"window", "threshold", "count"});
    for (const SweepCell& c : sweep_alerts(s, thresholds, p.windows)) {
      csv.row({std::to_string(c.window), format_ratio(c.threshold), std::to_string(c.count)});
    }
    out.artifacts.push_back(path);
  }

  const fs::path new_path = out_dir / "new-fingerprints.csv";
  {
    auto file = open_out(new_path);
    CsvWriter csv(file);
    csv.row({"timestamp", "new_fingerprints", "alert"});
    FingerprintHistory history;
    std::size_t new_alerts = 0;
    for (std::size_t i = 0; i < stream.size(); ++i) {
      if (i == 0) {
        history.observe(stream[i]);
        continue;
      }
      std::set<Fingerprint> fresh;
      for (const RouterStatus& s : stream[i]) {
        if (!history.seen(s.fingerprint)) fresh.insert(s.fingerprint);
      }
      const auto r = new_fingerprint_alert(history, stream[i], p.new_fingerprint_threshold);
      if (r.alert) {
        ++new_alerts;
        out.flagged.insert(fresh.begin(), fresh.end());
        spdlog::warn("new-fingerprint alert: {} unseen fingerprints at {}", r.count,
                     format_iso8601(stream[i].valid_after()));
      }
      csv.row({format_iso8601(stream[i].valid_after()), std::to_string(r.count), r.alert ? "1" : "0"});
    }
    out.alerts += new_alerts;
    out.report.push_back(fmt::format("new fingerprints (>= {}): {} alerts, {} distinct fingerprints",
                                     p.new_fingerprint_threshold, new_alerts, history.distinct()));
  }
  out.artifacts.push_back(new_path);
  return out;
}

ModuleOutput run_uptime(std::span<const Consensus> stream, const UptimeParams& p, const fs::path& out_dir) {
  if (p.image_width == 0) throw InvalidArgument("image width must be positive");
  ModuleOutput out;
  const UptimeMatrix matrix = build_matrix(stream);
  const ColumnOrder order = cluster_order(matrix);
  const std::vector<Image> images = render(matrix, order, p.image_width);
  const std::string date = format_date(stream.front().valid_after());

  for (std::size_t k = 0; k < images.size(); ++k) {
    const fs::path path = out_dir / fmt::format("uptime-{}-{}.ppm", date, k);
    auto file = open_out(path);
    file << images[k].to_ppm();
    out.artifacts.push_back(path);
  }

  std::vector<bool> in_run(matrix.cols(), false);
  std::size_t flagged_runs = 0;
  for (const ColumnRun& run : order.identical_runs) {
    for (std::size_t pos = run.begin; pos < run.end; ++pos) in_run[pos] = true;
    const std::size_t col = order.permutation[run.begin];
    const std::size_t online = matrix.online_count(col);
    if (online == 0 || online == matrix.rows()) continue;
    ++flagged_runs;
    for (std::size_t pos = run.begin; pos < run.end; ++pos) {
      out.flagged.insert(matrix.relays()[order.permutation[pos]]);
    }
  }

  const fs::path map_path = out_dir / fmt::format("uptime-{}-columns.csv", date);
  {
    auto file = open_out(map_path);
    CsvWriter csv(file);
    csv.row({"chunk", "x", "column", "fingerprint", "online_hours", "identical"});
    for (std::size_t pos = 0; pos < order.permutation.size(); ++pos) {
      const std::size_t col = order.permutation[pos];
      csv.row({std::to_string(pos / p.image_width), std::to_string(pos % p.image_width), std::to_string(col),
               matrix.relays()[col].hex(), std::to_string(matrix.online_count(col)), in_run[pos] ? "1" : "0"});
    }
  }
  out.artifacts.push_back(map_path);
  out.report.push_back(fmt::format("uptime: {} consensuses x {} relays, {} identical runs ({} non-constant), {} image(s)",
                                   matrix.rows(), matrix.cols(), order.identical_runs.size(), flagged_runs,
                                   images.size()));
  return out;
}

ModuleOutput run_fingerprints(std::span<const Consensus> stream, const FingerprintParams& p,
                              const fs::path& out_dir) {
  ModuleOutput out;
  const auto records = track(stream);
  const auto ranked = records.empty() ? std::vector<FingerprintRecord>{} : top_changers(records, records.size());

  const fs::path path = out_dir / "fingerprints.csv";
  {
    auto file = open_out(path);
    CsvWriter csv(file);
    csv.row({"address", "distinct_fingerprints", "transitions", "first_seen", "last_seen", "fingerprints"});
    for (const FingerprintRecord& r : ranked) {
      std::string fps;
      for (const Fingerprint& fp : r.fingerprints) {
        if (!fps.empty()) fps += ';';
        fps += fp.hex();
      }
      csv.row({r.address.str(), std::to_string(r.fingerprints.size()), std::to_string(r.transitions),
               format_iso8601(r.first_seen), format_iso8601(r.last_seen), fps});
    }
  }
  out.artifacts.push_back(path);

  const std::size_t top = std::min(p.top, ranked.size());
  out.report.push_back(fmt::format("fingerprints: {} addresses; top {}:", ranked.size(), top));
  out.report.push_back(fmt::format("  {:>4}  {:<15}  {:>8}  {:>11}", "rank", "address", "distinct", "transitions"));
  for (std::size_t i = 0; i < top; ++i) {
    const FingerprintRecord& r = ranked[i];
    out.report.push_back(fmt::format("  {:>4}  {:<15}  {:>8}  {:>11}", i + 1, r.address.str(),
                                     r.fingerprints.size(), r.transitions));
    if (r.fingerprints.size() >= 2) out.flagged.insert(r.fingerprints.begin(), r.fingerprints.end());
  }
  return out;
}

Fingerprint resolve_seed(const std::string& seed, const Consensus& consensus) {
  if (auto fp = Fingerprint::from_hex(seed)) return *fp;
  std::optional<Fingerprint> match;
  std::size_t count = 0;
  for (const RouterStatus& s : consensus) {
    if (s.nickname == seed) {
      if (!match) match = s.fingerprint;
      ++count;
    }
  }
  if (!match) throw SeedNotFound("no relay with fingerprint or nickname '" + seed + "' in the last consensus");
  if (count > 1) spdlog::warn("nickname '{}' matches {} relays; using {}", seed, count, match->hex());
  return *match;
}

std::vector<std::vector<Fingerprint>> read_groups(const fs::path& path, std::vector<std::string>& ids) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::map<std::string, std::size_t> slot;
  std::vector<std::vector<Fingerprint>> groups;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty() || line == "\r") continue;
    const auto fields = csv_split(line);
    if (fields.size() != 2) throw Error(fmt::format("{}:{}: expected group_id,fingerprint", path.string(), line_no));
    const auto fp = Fingerprint::from_hex(fields[1]);
    if (!fp) throw Error(fmt::format("{}:{}: bad fingerprint '{}'", path.string(), line_no, fields[1]));
    auto [it, fresh] = slot.emplace(fields[0], groups.size());
    if (fresh) {
      groups.emplace_back();
      ids.push_back(fields[0]);
    }
    groups[it->second].push_back(*fp);
  }
  return groups;
}

ModuleOutput run_neighbors(std::span<const Consensus> stream, const DescriptorLookup& descriptors,
                           const NeighborParams& p, const fs::path& out_dir) {
  if (p.seed.empty() && !p.groups) throw InvalidArgument("neighbors needs --seed or --groups");
  ModuleOutput out;
  const Consensus& last = stream.back();

  if (!p.seed.empty()) {
    const Fingerprint seed = resolve_seed(p.seed, last);
    const NeighborRanking ranking = nearest(seed, last, descriptors, p.top);
    auto describe = [&](const Fingerprint& fp) -> std::pair<std::string, std::string> {
      const RouterStatus* s = last.find(fp);
      auto d = descriptors.find(fp);
      return {s->nickname, serialize_relay(*s, d == descriptors.end() ? nullptr : &d->second)};
    };
    const fs::path path = out_dir / "neighbors.csv";
    {
      auto file = open_out(path);
      CsvWriter csv(file);
      csv.row({"rank", "fingerprint", "nickname", "distance", "relay_string"});
      const auto [seed_nick, seed_str] = describe(seed);
      csv.row({"0", seed.hex(), seed_nick, "0", seed_str});
      out.report.push_back(fmt::format("neighbors of {} ({}):", seed_nick, seed.hex()));
      for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
        const Neighbor& n = ranking.entries[i];
        const auto [nick, str] = describe(n.fingerprint);
        csv.row({std::to_string(i + 1), n.fingerprint.hex(), nick, std::to_string(n.distance), str});
        out.report.push_back(fmt::format("  {:>3}  {}  {:<19}  {:>5}", i + 1, n.fingerprint.hex(), nick, n.distance));
      }
    }
    out.artifacts.push_back(path);
    out.flagged.insert(seed);
    for (const Neighbor& n : ranking.entries) out.flagged.insert(n.fingerprint);
  }

  if (p.groups) {
    std::vector<std::string> ids;
    auto groups = read_groups(*p.groups, ids);
    // Ground truth lists every fingerprint a group ever used; only members
    // present in the searched consensus can be scored.
    std::vector<std::vector<Fingerprint>> present;
    std::vector<std::string> present_ids;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      std::vector<Fingerprint> members;
      for (const Fingerprint& fp : groups[g]) {
        if (last.contains(fp)) members.push_back(fp);
      }
      if (members.size() < groups[g].size()) {
        spdlog::info("group {}: {} of {} members absent from the last consensus", ids[g],
                     groups[g].size() - members.size(), groups[g].size());
      }
      if (members.size() >= 2) {
        present.push_back(std::move(members));
        present_ids.push_back(ids[g]);
      }
    }
    ids = std::move(present_ids);
    const auto scores = accuracy(present, last, descriptors);
    const fs::path path = out_dir / "neighbors-accuracy.csv";
    auto file = open_out(path);
    CsvWriter csv(file);
    csv.row({"group_id", "fingerprint", "accuracy"});
    double sum = 0.0;
    std::size_t perfect = 0;
    for (const MemberAccuracy& m : scores) {
      csv.row({ids[m.group], m.member.hex(), format_ratio(m.accuracy)});
      sum += m.accuracy;
      perfect += m.accuracy == 1.0;
    }
    out.artifacts.push_back(path);
    if (!scores.empty()) {
      out.report.push_back(fmt::format("neighbor accuracy: {} searches, mean {}, perfect {}", scores.size(),
                                       format_ratio(sum / static_cast<double>(scores.size())), perfect));
    }
  }
  return out;
}

bool in_range(Timestamp t, const RunConfig& c) {
  return (!c.from || t >= *c.from) && (!c.to || t <= *c.to);
}

RunResult run_checked(const RunConfig& config) {
  RunResult result;
  if (config.modules.empty()) throw InvalidArgument("no module selected");
  if (config.from && config.to && *config.from > *config.to) throw InvalidArgument("--from is after --to");
  std::error_code ec;
  fs::create_directories(config.out, ec);
  if (ec || !fs::is_directory(config.out)) {
    throw Error("output directory " + config.out.string() + " is not writable");
  }
  const unsigned threads = config.threads ? config.threads : std::max(1U, std::thread::hardware_concurrency());

  Corpus corpus;
  if (config.modules.contains(Module::Synth)) {
    std::ifstream in(config.synth.spec, std::ios::binary);
    if (!in) throw Error("cannot read synth spec " + config.synth.spec.string());
    std::stringstream text;
    text << in.rdbuf();
    const SynthConfig spec = parse_synth_spec(text.str());
    SynthResult synth = generate(spec.baseline, spec.sybils);
    const auto written = write_synth_output(synth, config.out);
    result.artifacts.insert(result.artifacts.end(), written.begin(), written.end());
    result.report.push_back(fmt::format("synth: {} consensuses, {} groups, {} ground-truth fingerprints",
                                        synth.consensuses.size(), spec.sybils.size(), synth.ground_truth.size()));
    if (config.inputs.empty()) {
      corpus.consensuses = std::move(synth.consensuses);
      corpus.descriptors = std::move(synth.descriptors);
    }
  }

  std::set<Module> analyses = config.modules;
  analyses.erase(Module::Synth);
  if (analyses.empty()) return result;

  if (!config.inputs.empty()) {
    corpus = load_corpus(read_documents(config.inputs), threads);
    result.skipped_documents = corpus.skipped_documents;
    if (corpus.skipped_documents > 0) {
      spdlog::warn("skipped {} corrupt document(s)", corpus.skipped_documents);
    }
  }

  std::vector<Consensus> stream;
  for (const Consensus& c : corpus.consensuses) {
    if (in_range(c.valid_after(), config)) {
      stream.push_back(config.filter.empty() ? c : filter(c, config.filter));
    }
  }
  corpus.consensuses.clear();
  if (stream.empty()) throw Error("no readable consensus in the selected inputs and date range");
  spdlog::info("{} consensuses from {} to {}", stream.size(), format_iso8601(stream.front().valid_after()),
               format_iso8601(stream.back().valid_after()));
  if (analyses.contains(Module::Churn) && stream.size() < 2) {
    spdlog::warn("churn needs at least two consensuses; no churn points will be produced");
  }

  const std::span<const Consensus> view(stream);
  std::vector<std::pair<Module, std::future<ModuleOutput>>> jobs;
  const auto policy = threads > 1 ? std::launch::async : std::launch::deferred;
  for (Module m : analyses) {
    switch (m) {
      case Module::Churn:
        jobs.emplace_back(m, std::async(policy, [&] { return run_churn(view, config.churn, config.out); }));
        break;
      case Module::Uptime:
        jobs.emplace_back(m, std::async(policy, [&] { return run_uptime(view, config.uptime, config.out); }));
        break;
      case Module::Fingerprints:
        jobs.emplace_back(m, std::async(policy, [&] { return run_fingerprints(view, config.fingerprints, config.out); }));
        break;
      case Module::Neighbors:
        jobs.emplace_back(m, std::async(policy, [&] {
                            return run_neighbors(view, corpus.descriptors, config.neighbors, config.out);
                          }));
        break;
      case Module::Synth:
        break;
    }
  }

  std::map<Fingerprint, std::vector<Module>> flagged_by;
  std::optional<std::string> failure;
  for (auto& [module, job] : jobs) {
    try {
      ModuleOutput o = job.get();
      result.artifacts.insert(result.artifacts.end(), o.artifacts.begin(), o.artifacts.end());
      result.report.insert(result.report.end(), o.report.begin(), o.report.end());
      result.alerts += o.alerts;
      for (const Fingerprint& fp : o.flagged) flagged_by[fp].push_back(module);
    } catch (const std::exception& e) {
      if (!failure) failure = fmt::format("{}: {}", module_name(module), e.what());
    }
  }
  if (failure) throw Error(*failure);

  if (analyses.size() >= 2) {
    const fs::path path = config.out / "suspects.csv";
    auto file = open_out(path);
    CsvWriter csv(file);
    csv.row({"fingerprint", "nickname", "module_count", "modules"});
    std::size_t suspects = 0;
    for (const auto& [fp, modules] : flagged_by) {
      if (modules.size() < 2) continue;
      std::string names;
      for (Module m : modules) {
        if (!names.empty()) names += ';';
        names += module_name(m);
      }
      csv.row({fp.hex(), nickname_of(fp, view), std::to_string(modules.size()), names});
      ++suspects;
    }
    result.artifacts.push_back(path);
    result.report.push_back(fmt::format("suspects flagged by >= 2 modules: {}", suspects));
  }

  if (result.alerts > 0) result.exit_code = kExitAlerts;
  return result;
}

}  // namespace

std::string_view module_name(Module module) {
  for (const auto& [m, name] : kModuleNames) {
    if (m == module) return name;
  }
  return "unknown";
}

std::optional<Module> parse_module(std::string_view name) {
  for (const auto& [m, n] : kModuleNames) {
    if (n == name) return m;
  }
  return std::nullopt;
}

RunResult run(const RunConfig& config) {
  try {
    return run_checked(config);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    RunResult failed;
    failed.exit_code = kExitFatal;
    failed.error = e.what();
    return failed;
  }
}

}  // namespace sybilscope
