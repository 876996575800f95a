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

#include <string>

#include <fmt/format.h>

#include "lines.hpp"
#include "sybilscope/dirdata.hpp"
#include "sybilscope/error.hpp"

namespace sybilscope {

using detail::LineReader;
using detail::parse_uint;
using detail::rest_after_keyword;
using detail::split_ws;

namespace {

// Parses the descriptor starting at `reader`'s current position. `first` is
// the already-consumed "router" line. Stops before the next "router" line and
// hands it back through `pending`.
RouterDescriptor parse_one(LineReader& reader, std::string_view first, std::size_t first_no,
                           std::optional<std::pair<std::string_view, std::size_t>>& pending) {
  RouterDescriptor d;
  bool have_published = false;
  bool have_fingerprint = false;
  bool have_bandwidth = false;
  bool in_object = false;

  auto handle = [&](std::string_view line, std::size_t no) {
    const auto tokens = split_ws(line);
    if (tokens.empty()) return;
    const std::string_view keyword = tokens[0];
    if (keyword == "router") {
      if (tokens.size() != 6) throw MalformedDocument(no, "\"router\" line needs 5 fields");
      d.nickname = std::string(tokens[1]);
      auto address = Ipv4::parse(tokens[2]);
      if (!address) throw MalformedDocument(no, "unparseable IPv4 address");
      d.address = *address;
      auto or_port = parse_uint<std::uint16_t>(tokens[3]);
      if (!or_port || *or_port == 0) throw MalformedDocument(no, "invalid OR port");
      d.or_port = *or_port;
      auto dir_port = parse_uint<std::uint16_t>(tokens[5]);
      if (!dir_port) throw MalformedDocument(no, "invalid directory port");
      d.dir_port = *dir_port;
    } else if (keyword == "platform") {
      d.platform = std::string(rest_after_keyword(line));
    } else if (keyword == "published") {
      if (tokens.size() != 3) throw MalformedDocument(no, "\"published\" needs date and time");
      auto ts = parse_timestamp(tokens[1], tokens[2]);
      if (!ts) throw MalformedDocument(no, "unparseable publication time");
      d.published = *ts;
      have_published = true;
    } else if (keyword == "fingerprint") {
      auto fp = Fingerprint::from_hex(rest_after_keyword(line));
      if (!fp) throw MalformedDocument(no, "unparseable fingerprint");
      d.fingerprint = *fp;
      have_fingerprint = true;
    } else if (keyword == "uptime") {
      if (tokens.size() != 2) throw MalformedDocument(no, "\"uptime\" needs one value");
      auto uptime = parse_uint<std::uint64_t>(tokens[1]);
      if (!uptime) throw MalformedDocument(no, "non-numeric uptime");
      d.uptime_seconds = *uptime;
    } else if (keyword == "bandwidth") {
      if (tokens.size() != 4) throw MalformedDocument(no, "\"bandwidth\" needs three values");
      auto avg = parse_uint<std::uint64_t>(tokens[1]);
      auto burst = parse_uint<std::uint64_t>(tokens[2]);
      auto observed = parse_uint<std::uint64_t>(tokens[3]);
      if (!avg || !burst || !observed) throw MalformedDocument(no, "non-numeric bandwidth");
      d.bandwidth_avg = *avg;
      d.bandwidth_burst = *burst;
      d.bandwidth_observed = *observed;
      have_bandwidth = true;
    } else if (keyword == "contact") {
      d.contact = std::string(rest_after_keyword(line));
    } else if (keyword == "family") {
      for (std::size_t i = 1; i < tokens.size(); ++i) d.family.emplace_back(tokens[i]);
    } else if (keyword == "accept" || keyword == "reject") {
      if (tokens.size() != 2) throw MalformedDocument(no, "exit policy rule needs one pattern");
      d.exit_policy.push_back(fmt::format("{} {}", keyword, tokens[1]));
    }
  };

  handle(first, first_no);
  std::string_view line;
  while (reader.next(line)) {
    const std::size_t no = reader.number();
    if (in_object) {
      if (line.starts_with("-----END")) in_object = false;
      continue;
    }
    if (line.starts_with("-----BEGIN")) {
      in_object = true;
      continue;
    }
    line = detail::strip_opt(line);
    if (line.starts_with("router ")) {
      pending.emplace(line, no);
      break;
    }
    if (line.empty() || line.front() == '@') continue;
    handle(line, no);
  }

  if (!have_published) throw MalformedDocument(first_no, "descriptor lacks \"published\"");
  if (!have_fingerprint) throw MalformedDocument(first_no, "descriptor lacks \"fingerprint\"");
  if (!have_bandwidth) throw MalformedDocument(first_no, "descriptor lacks \"bandwidth\"");
  return d;
}

std::vector<RouterDescriptor> parse_all(std::string_view text) {
  LineReader reader(text);
  std::vector<RouterDescriptor> out;
  std::optional<std::pair<std::string_view, std::size_t>> pending;
  std::string_view line;
  bool in_object = false;
  while (true) {
    if (pending) {
      auto [first, no] = *pending;
      pending.reset();
      out.push_back(parse_one(reader, first, no, pending));
      continue;
    }
    if (!reader.next(line)) break;
    if (in_object) {
      if (line.starts_with("-----END")) in_object = false;
      continue;
    }
    if (line.starts_with("-----BEGIN")) {
      in_object = true;
      continue;
    }
    line = detail::strip_opt(line);
    if (line.empty() || line.front() == '@') continue;
    if (line.starts_with("router ") || line == "router") {
      out.push_back(parse_one(reader, line, reader.number(), pending));
      continue;
    }
    throw MalformedDocument(reader.number(), "expected a \"router\" line");
  }
  return out;
}

}  // namespace

RouterDescriptor parse_descriptor(std::string_view text) {
  auto all = parse_all(text);
  if (all.size() != 1) {
    throw MalformedDocument(1, fmt::format("expected one descriptor, found {}", all.size()));
  }
  return std::move(all.front());
}

std::vector<RouterDescriptor> parse_descriptors(std::string_view text) { return parse_all(text); }

std::string serialize_descriptor(const RouterDescriptor& d) {
  std::string out;
  fmt::format_to(std::back_inserter(out), "router {} {} {} 0 {}\n", d.nickname, d.address.str(),
                 d.or_port, d.dir_port);
  if (!d.platform.empty()) out += "platform " + d.platform + "\n";
  out += "published " + format_timestamp(d.published) + "\n";
  out += "fingerprint";
  const std::string hex = d.fingerprint.hex();
  for (std::size_t i = 0; i < hex.size(); i += 4) {
    out += ' ';
    out.append(hex, i, 4);
  }
  out += '\n';
  if (d.uptime_seconds) fmt::format_to(std::back_inserter(out), "uptime {}\n", *d.uptime_seconds);
  fmt::format_to(std::back_inserter(out), "bandwidth {} {} {}\n", d.bandwidth_avg,
                 d.bandwidth_burst, d.bandwidth_observed);
  if (d.contact) out += "contact " + *d.contact + "\n";
  if (!d.family.empty()) {
    out += "family";
    for (const auto& ref : d.family) out += " " + ref;
    out += '\n';
  }
  for (const auto& rule : d.exit_policy) out += rule + "\n";
  return out;
}

}  // namespace sybilscope
