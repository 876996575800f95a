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

#include "sybilscope/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <unordered_set>

#include <fmt/format.h>

#include "sybilscope/csv.hpp"
#include "sybilscope/error.hpp"

namespace sybilscope {
namespace {

// Engine output is fully specified by the standard; the distributions are
// not, so they are implemented here to keep streams identical everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform in [0, n).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x = 0;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  std::uint64_t between(std::uint64_t lo, std::uint64_t hi) { return lo + below(hi - lo + 1); }

  template <class T>
  const T& pick(const std::vector<T>& items) {
    return items[below(items.size())];
  }

 private:
  std::mt19937_64 engine_;
};

const std::vector<std::string> kVersions = {
    "Tor 0.2.4.27", "Tor 0.2.5.12", "Tor 0.2.6.10", "Tor 0.2.7.6", "Tor 0.2.8.1-alpha",
};
const std::vector<std::string> kSystems = {"Linux", "Windows 7", "FreeBSD", "Darwin", "OpenBSD"};
const std::vector<std::string> kDomains = {"example.org", "mail.example.net", "relays.example.com",
                                           "riseup.example", "posteo.example"};
const std::vector<std::string> kExitSummaries = {
    "accept 80,443",
    "accept 20-23,43,53,79-81,88,110,143,194,220,443,464-465,543-544,563,706,749,873,902-904,981,"
    "989-995,1194,1220,1293,1500,1533,1677,1723,1755,1863,2083,2086-2087,2095-2096,2102-2104,"
    "3128,3389,3690,4321,4643,5050,5190,5222-5223,5228,5900,6660-6669,6679,6697,8000,8008,8074,"
    "8080,8087-8088,8332-8333,8443,8888,9418,9999-10000,11371,12350,19294,19638,23456,33033,64738",
    "accept 1-65535",
    "accept 22,53,80,110,143,443,993,995",
};
constexpr char kAlnum[] = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
constexpr char kAlpha[] = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";

struct Profile {
  std::string nickname;
  Ipv4 address;
  std::uint16_t or_port = 9001;
  std::uint16_t dir_port = 0;
  std::string version;
  std::uint64_t bandwidth = 0;
  FlagSet flags;
  std::optional<std::string> policy;
  std::string platform;
  std::optional<std::string> contact;
};

struct Identity {
  Fingerprint fingerprint;
  DescriptorDigest digest;
};

struct Relay {
  Profile profile;
  std::vector<Identity> identities;
  std::optional<std::size_t> group;
  bool online = false;
  std::size_t streak_start = 0;
  std::size_t online_hours = 0;
  std::size_t total_online_hours = 0;  // groups only, for fingerprint cycling
};

struct Sighting {
  std::size_t relay = 0;
  std::size_t identity = 0;
  std::size_t hour = 0;
  std::size_t streak_start = 0;
};

class Generator {
 public:
  Generator(const BaselineSpec& baseline, const std::vector<SybilSpec>& sybils)
      : baseline_(baseline), sybils_(sybils), rng_(baseline.rng_seed) {}

  SynthResult run();

 private:
  std::string random_string(const char* alphabet, std::size_t alphabet_size, std::size_t len) {
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s.push_back(alphabet[rng_.below(alphabet_size)]);
    return s;
  }

  std::string random_nickname() {
    return random_string(kAlpha, 52, 1) + random_string(kAlnum, 62, rng_.between(4, 13));
  }

  Ipv4 random_address() {
    while (true) {
      // Public-looking unicast space, skipping 0/8, 10/8, 127/8 and multicast.
      const auto first = static_cast<std::uint32_t>(rng_.between(1, 223));
      if (first == 10 || first == 127) continue;
      const Ipv4 a((first << 24) | static_cast<std::uint32_t>(rng_.below(1U << 24)));
      if ((a.value() & 0xFF) == 0 || (a.value() & 0xFF) == 255) continue;
      if (used_addresses_.insert(a.value()).second) return a;
    }
  }

  /// First of `count` consecutive unused addresses.
  Ipv4 random_block(std::size_t count) {
    while (true) {
      const auto first = static_cast<std::uint32_t>(rng_.between(11, 223));
      if (first == 127) continue;
      const std::uint32_t base = (first << 24) | (static_cast<std::uint32_t>(rng_.below(1U << 16)) << 8) | 1U;
      bool free = true;
      for (std::size_t i = 0; i < count && free; ++i) {
        free = !used_addresses_.contains(base + static_cast<std::uint32_t>(i));
      }
      if (!free) continue;
      for (std::size_t i = 0; i < count; ++i) used_addresses_.insert(base + static_cast<std::uint32_t>(i));
      return Ipv4(base);
    }
  }

  Identity fresh_identity() {
    Identity id;
    while (true) {
      Fingerprint::Bytes bytes{};
      for (std::size_t i = 0; i < bytes.size(); i += 8) {
        const std::uint64_t word = rng_.next();
        for (std::size_t k = 0; k < 8 && i + k < bytes.size(); ++k) {
          bytes[i + k] = static_cast<std::uint8_t>(word >> (8 * k));
        }
      }
      id.fingerprint = Fingerprint(bytes);
      if (used_fingerprints_.insert(id.fingerprint).second) break;
    }
    DescriptorDigest::Bytes digest{};
    for (auto& b : digest) b = static_cast<std::uint8_t>(rng_.next());
    id.digest = DescriptorDigest(digest);
    return id;
  }

  FlagSet random_flags() {
    FlagSet flags;
    for (Flag f : kAllFlags) {
      auto it = baseline_.flag_probabilities.find(f);
      if (it != baseline_.flag_probabilities.end() && rng_.bernoulli(it->second)) flags.insert(f);
    }
    return flags;
  }

  Profile random_profile() {
    Profile p;
    p.nickname = random_nickname();
    p.address = random_address();
    const double port_roll = rng_.uniform();
    p.or_port = port_roll < 0.5 ? 9001 : port_roll < 0.75 ? 443 : static_cast<std::uint16_t>(rng_.between(1024, 65535));
    const double dir_roll = rng_.uniform();
    p.dir_port = dir_roll < 0.5 ? 0 : dir_roll < 0.8 ? 9030 : dir_roll < 0.9 ? 80 : static_cast<std::uint16_t>(rng_.between(1024, 65535));
    p.version = rng_.pick(kVersions);
    // Roughly log-uniform between 20 and 50,000.
    p.bandwidth = static_cast<std::uint64_t>(20.0 * std::pow(2500.0, rng_.uniform()));
    p.flags = random_flags();
    p.policy = p.flags.has(Flag::Exit) ? rng_.pick(kExitSummaries) : std::string("reject 1-65535");
    p.platform = p.version + " on " + rng_.pick(kSystems);
    if (rng_.bernoulli(0.6)) {
      p.contact = random_string(kAlpha, 52, rng_.between(3, 10)) + " <" +
                  random_string(kAlnum, 62, rng_.between(3, 8)) + " AT " + rng_.pick(kDomains) + ">";
    }
    return p;
  }

  std::size_t add_relay(Profile profile, std::size_t identities, std::optional<std::size_t> group) {
    Relay r;
    r.profile = std::move(profile);
    r.group = group;
    for (std::size_t i = 0; i < identities; ++i) r.identities.push_back(fresh_identity());
    relays_.push_back(std::move(r));
    return relays_.size() - 1;
  }

  void validate() const;
  void create_groups();
  bool group_online(const SybilSpec& spec, std::size_t hour) const;
  void set_online(std::size_t idx, bool online, std::size_t hour);

  const BaselineSpec& baseline_;
  const std::vector<SybilSpec>& sybils_;
  Rng rng_;
  std::vector<Relay> relays_;
  std::vector<std::size_t> baseline_online_;
  std::vector<std::size_t> baseline_offline_;
  std::vector<std::vector<std::size_t>> group_members_;
  std::unordered_set<std::uint32_t> used_addresses_;
  std::unordered_set<Fingerprint> used_fingerprints_;
};

void Generator::validate() const {
  const BaselineSpec& b = baseline_;
  auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (b.relay_count < 1) throw SpecError("relay_count must be at least 1");
  if (b.duration_hours < 1) throw SpecError("duration_hours must be at least 1");
  if (!rate_ok(b.hourly_join_rate) || !rate_ok(b.hourly_leave_rate) || !rate_ok(b.fresh_join_fraction)) {
    throw SpecError("rates must lie in [0, 1]");
  }
  for (const auto& [flag, p] : b.flag_probabilities) {
    if (!rate_ok(p)) throw SpecError(fmt::format("probability for {} outside [0, 1]", flag_name(flag)));
  }
  for (std::size_t g = 0; g < sybils_.size(); ++g) {
    const SybilSpec& s = sybils_[g];
    if (s.group_size < 2) throw SpecError(fmt::format("group {}: group_size must be at least 2", g));
    if (s.join_hour >= b.duration_hours) {
      throw SpecError(fmt::format("group {}: join hour {} is past the stream end", g, s.join_hour));
    }
    if (s.leave_hour && (*s.leave_hour <= s.join_hour || *s.leave_hour > b.duration_hours)) {
      throw SpecError(fmt::format("group {}: leave hour must follow join hour and lie within the stream", g));
    }
    if (s.uptime.kind != UptimePattern::Kind::Constant && s.uptime.on_hours == 0) {
      throw SpecError(fmt::format("group {}: on_hours must be positive", g));
    }
    if (s.uptime.kind == UptimePattern::Kind::Diurnal && s.uptime.off_hours == 0) {
      throw SpecError(fmt::format("group {}: off_hours must be positive", g));
    }
    if (s.fingerprint_churn) {
      std::size_t online = 0;
      for (std::size_t h = s.join_hour; h < s.leave_hour.value_or(b.duration_hours); ++h) {
        online += group_online(s, h);
      }
      if (*s.fingerprint_churn < 1 || *s.fingerprint_churn > online) {
        throw SpecError(fmt::format("group {}: fingerprint_churn {} needs 1..{} (online hours)", g,
                                    *s.fingerprint_churn, online));
      }
    }
    if (s.nickname && (s.nickname->empty() || s.nickname->size() > 19)) {
      throw SpecError(fmt::format("group {}: nickname must have 1-19 characters", g));
    }
    if (s.or_port && *s.or_port == 0) throw SpecError(fmt::format("group {}: or_port must be positive", g));
  }
}

bool Generator::group_online(const SybilSpec& spec, std::size_t hour) const {
  if (hour < spec.join_hour || hour >= spec.leave_hour.value_or(baseline_.duration_hours)) return false;
  const std::size_t t = hour - spec.join_hour;
  switch (spec.uptime.kind) {
    case UptimePattern::Kind::Constant:
      return true;
    case UptimePattern::Kind::Diurnal:
      return t % (spec.uptime.on_hours + spec.uptime.off_hours) < spec.uptime.on_hours;
    case UptimePattern::Kind::Step:
      return t < spec.uptime.on_hours || t >= spec.uptime.on_hours + spec.uptime.off_hours;
  }
  return false;
}

void Generator::create_groups() {
  for (std::size_t g = 0; g < sybils_.size(); ++g) {
    const SybilSpec& s = sybils_[g];
    const std::size_t identities = s.fingerprint_churn.value_or(1);
    std::size_t total_online = 0;
    for (std::size_t h = 0; h < baseline_.duration_hours; ++h) total_online += group_online(s, h);

    Profile shared = random_profile();
    used_addresses_.erase(shared.address.value());
    if (s.or_port) shared.or_port = *s.or_port;
    if (s.dir_port) shared.dir_port = *s.dir_port;
    if (s.contact) shared.contact = *s.contact;

    const bool adjacent = s.similarity.kind != Similarity::Kind::Diversified;
    const Ipv4 base = adjacent ? random_block(s.group_size) : Ipv4();
    std::string prefix = s.nickname.value_or(
        random_string(kAlpha, 52, 1) + random_string(kAlpha, 52, rng_.between(5, 9)));
    const std::size_t width = std::max<std::size_t>(3, fmt::format("{}", s.group_size - 1).size());
    if (s.similarity.kind == Similarity::Kind::Templated && prefix.size() + width > 19) {
      prefix.resize(19 - width);
    }

    std::vector<std::size_t> members;
    for (std::size_t m = 0; m < s.group_size; ++m) {
      Profile p;
      switch (s.similarity.kind) {
        case Similarity::Kind::Clone:
          p = shared;
          p.nickname = s.nickname.value_or(prefix);
          p.address = Ipv4(base.value() + static_cast<std::uint32_t>(m));
          break;
        case Similarity::Kind::Templated:
          p = shared;
          p.nickname = fmt::format("{}{:0{}}", prefix, m, width);
          p.address = Ipv4(base.value() + static_cast<std::uint32_t>(m));
          break;
        case Similarity::Kind::Diversified:
          p = random_profile();
          if (s.nickname) p.nickname = *s.nickname;
          if (s.or_port) p.or_port = *s.or_port;
          if (s.dir_port) p.dir_port = *s.dir_port;
          if (s.contact) p.contact = *s.contact;
          break;
      }
      const std::size_t idx = add_relay(std::move(p), identities, g);
      relays_[idx].total_online_hours = total_online;
      members.push_back(idx);
    }
    group_members_.push_back(std::move(members));
  }
}

void Generator::set_online(std::size_t idx, bool online, std::size_t hour) {
  Relay& r = relays_[idx];
  if (online && !r.online) r.streak_start = hour;
  r.online = online;
}

SynthResult Generator::run() {
  validate();
  SynthResult result;

  for (std::size_t i = 0; i < baseline_.relay_count; ++i) {
    const std::size_t idx = add_relay(random_profile(), 1, std::nullopt);
    set_online(idx, true, 0);
    baseline_online_.push_back(idx);
  }
  create_groups();

  std::vector<std::vector<std::optional<Sighting>>> sightings(relays_.size());

  for (std::size_t hour = 0; hour < baseline_.duration_hours; ++hour) {
    if (hour > 0) {
      std::vector<std::size_t> still_online;
      std::vector<std::size_t> left;
      for (std::size_t idx : baseline_online_) {
        if (rng_.bernoulli(baseline_.hourly_leave_rate)) {
          left.push_back(idx);
        } else {
          still_online.push_back(idx);
        }
      }
      std::size_t joins = 0;
      for (std::size_t i = 0; i < baseline_.relay_count; ++i) joins += rng_.bernoulli(baseline_.hourly_join_rate);
      for (std::size_t j = 0; j < joins; ++j) {
        if (!baseline_offline_.empty() && !rng_.bernoulli(baseline_.fresh_join_fraction)) {
          const std::size_t pos = rng_.below(baseline_offline_.size());
          const std::size_t idx = baseline_offline_[pos];
          baseline_offline_[pos] = baseline_offline_.back();
          baseline_offline_.pop_back();
          set_online(idx, true, hour);
          still_online.push_back(idx);
        } else {
          const std::size_t idx = add_relay(random_profile(), 1, std::nullopt);
          sightings.emplace_back();
          set_online(idx, true, hour);
          still_online.push_back(idx);
        }
      }
      for (std::size_t idx : left) {
        set_online(idx, false, hour);
        baseline_offline_.push_back(idx);
      }
      baseline_online_ = std::move(still_online);
    }

    for (std::size_t g = 0; g < sybils_.size(); ++g) {
      const bool online = group_online(sybils_[g], hour);
      for (std::size_t idx : group_members_[g]) set_online(idx, online, hour);
    }

    const Timestamp valid_after = baseline_.start + std::chrono::hours(static_cast<long>(hour));
    std::vector<RouterStatus> statuses;
    statuses.reserve(baseline_online_.size());
    auto emit = [&](std::size_t idx) {
      Relay& r = relays_[idx];
      std::size_t identity = 0;
      if (r.group && r.identities.size() > 1) {
        identity = r.online_hours * r.identities.size() / r.total_online_hours;
      }
      ++r.online_hours;
      const Profile& p = r.profile;
      RouterStatus s;
      s.nickname = p.nickname;
      s.fingerprint = r.identities[identity].fingerprint;
      s.descriptor_digest = r.identities[identity].digest;
      s.published = valid_after - std::chrono::hours(1);
      s.address = p.address;
      s.or_port = p.or_port;
      s.dir_port = p.dir_port;
      s.flags = p.flags;
      s.version = p.version;
      s.bandwidth = p.bandwidth;
      s.exit_policy_summary = p.policy;
      statuses.push_back(std::move(s));
      auto& slots = sightings[idx];
      if (slots.size() < r.identities.size()) slots.resize(r.identities.size());
      slots[identity] = Sighting{idx, identity, hour, r.streak_start};
    };
    for (std::size_t idx : baseline_online_) emit(idx);
    for (std::size_t g = 0; g < sybils_.size(); ++g) {
      for (std::size_t idx : group_members_[g]) {
        if (relays_[idx].online) emit(idx);
      }
    }
    result.consensuses.emplace_back(valid_after, std::move(statuses));
  }

  for (std::size_t g = 0; g < group_members_.size(); ++g) {
    for (std::size_t idx : group_members_[g]) {
      for (const Identity& id : relays_[idx].identities) result.ground_truth.push_back({g, id.fingerprint});
    }
  }

  for (std::size_t idx = 0; idx < relays_.size(); ++idx) {
    const Relay& r = relays_[idx];
    for (const auto& slot : sightings[idx]) {
      if (!slot) continue;
      const Profile& p = r.profile;
      const Timestamp seen = baseline_.start + std::chrono::hours(static_cast<long>(slot->hour));
      RouterDescriptor d;
      d.nickname = p.nickname;
      d.address = p.address;
      d.or_port = p.or_port;
      d.dir_port = p.dir_port;
      d.platform = p.platform;
      d.published = seen - std::chrono::hours(1);
      d.fingerprint = r.identities[slot->identity].fingerprint;
      d.uptime_seconds = (slot->hour - slot->streak_start) * 3600;
      d.bandwidth_avg = p.bandwidth * 1024;
      d.bandwidth_burst = p.bandwidth * 2048;
      d.bandwidth_observed = p.bandwidth * 1000;
      d.contact = p.contact;
      if (p.policy && p.policy->starts_with("accept ")) {
        std::string_view ports = std::string_view(*p.policy).substr(7);
        while (!ports.empty()) {
          const auto comma = ports.find(',');
          d.exit_policy.push_back(fmt::format("accept *:{}", ports.substr(0, comma)));
          if (comma == std::string_view::npos) break;
          ports.remove_prefix(comma + 1);
        }
      }
      d.exit_policy.push_back("reject *:*");
      result.descriptors.emplace(d.fingerprint, std::move(d));
    }
  }
  return result;
}

}  // namespace

std::map<Flag, double> BaselineSpec::default_flag_probabilities() {
  return {
      {Flag::Running, 1.0}, {Flag::Valid, 1.0},  {Flag::Fast, 0.9},  {Flag::Stable, 0.7},
      {Flag::V2Dir, 0.6},   {Flag::HSDir, 0.45}, {Flag::Guard, 0.3}, {Flag::Exit, 0.15},
  };
}

Timestamp BaselineSpec::default_start() {
  return Timestamp{std::chrono::sys_days{std::chrono::year{2015} / 10 / 1}};
}

std::vector<Fingerprint> SynthResult::group_members(std::size_t group) const {
  std::vector<Fingerprint> out;
  for (const GroundTruthEntry& e : ground_truth) {
    if (e.group == group) out.push_back(e.fingerprint);
  }
  return out;
}

SynthResult generate(const BaselineSpec& baseline, const std::vector<SybilSpec>& sybils) {
  return Generator(baseline, sybils).run();
}

std::vector<std::filesystem::path> write_synth_output(const SynthResult& result,
                                                      const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> written;
  const fs::path consensus_dir = dir / "consensuses";
  fs::create_directories(consensus_dir);
  auto open = [](const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    return out;
  };
  for (const Consensus& c : result.consensuses) {
    std::string name = format_timestamp(c.valid_after());
    std::replace(name.begin(), name.end(), ' ', '-');
    std::replace(name.begin(), name.end(), ':', '-');
    const fs::path path = consensus_dir / (name + "-consensus");
    auto out = open(path);
    out << "@type network-status-consensus-3 1.0\n" << serialize_consensus(c);
    written.push_back(path);
  }

  const fs::path descriptors = dir / "server-descriptors";
  {
    auto out = open(descriptors);
    out << "@type server-descriptor 1.0\n";
    for (const auto& [_, d] : result.descriptors) out << serialize_descriptor(d);
  }
  written.push_back(descriptors);

  const fs::path truth = dir / "ground-truth.csv";
  {
    auto out = open(truth);
    CsvWriter csv(out);
    csv.row({"group_id", "fingerprint"});
    for (const GroundTruthEntry& e : result.ground_truth) {
      csv.row({std::to_string(e.group), e.fingerprint.hex()});
    }
  }
  written.push_back(truth);
  return written;
}

}  // namespace sybilscope
