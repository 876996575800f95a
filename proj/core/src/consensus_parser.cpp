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

#include <algorithm>
#include <set>
#include <string>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "lines.hpp"
#include "sybilscope/dirdata.hpp"
#include "sybilscope/error.hpp"

namespace sybilscope {

using detail::LineReader;
using detail::parse_uint;
using detail::rest_after_keyword;
using detail::split_ws;

Consensus parse_consensus(std::string_view text, std::vector<ParseWarning>* warnings) {
  LineReader reader(text);
  std::string_view line;
  std::optional<Timestamp> valid_after;
  std::vector<RouterStatus> statuses;
  std::set<Fingerprint> seen;
  bool current_is_duplicate = false;
  bool in_footer = false;
  bool in_object = false;

  auto warn = [&](std::size_t at, std::string message) {
    spdlog::warn("consensus line {}: {}", at, message);
    if (warnings) warnings->push_back({at, std::move(message)});
  };

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
    if (line.empty() || line.front() == '@') continue;
    if (in_footer) continue;

    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    const std::string_view keyword = tokens[0];

    if (keyword == "valid-after") {
      if (valid_after) throw MalformedDocument(no, "duplicate valid-after");
      if (tokens.size() != 3) throw MalformedDocument(no, "valid-after needs date and time");
      valid_after = parse_timestamp(tokens[1], tokens[2]);
      if (!valid_after) throw MalformedDocument(no, "unparseable valid-after timestamp");
    } else if (keyword == "r") {
      if (tokens.size() != 9) {
        throw MalformedDocument(no, fmt::format("\"r\" line has {} fields, expected 8",
                                                tokens.size() - 1));
      }
      RouterStatus status;
      status.nickname = std::string(tokens[1]);
      auto fp = Fingerprint::from_base64(tokens[2]);
      if (!fp) throw MalformedDocument(no, "unparseable base64 identity");
      status.fingerprint = *fp;
      auto digest = DescriptorDigest::from_base64(tokens[3]);
      if (!digest) throw MalformedDocument(no, "unparseable base64 descriptor digest");
      status.descriptor_digest = *digest;
      auto published = parse_timestamp(tokens[4], tokens[5]);
      if (!published) throw MalformedDocument(no, "unparseable publication time");
      status.published = *published;
      auto address = Ipv4::parse(tokens[6]);
      if (!address) throw MalformedDocument(no, "unparseable IPv4 address");
      status.address = *address;
      auto or_port = parse_uint<std::uint16_t>(tokens[7]);
      if (!or_port || *or_port == 0) throw MalformedDocument(no, "invalid OR port");
      status.or_port = *or_port;
      auto dir_port = parse_uint<std::uint16_t>(tokens[8]);
      if (!dir_port) throw MalformedDocument(no, "invalid directory port");
      status.dir_port = *dir_port;

      current_is_duplicate = !seen.insert(status.fingerprint).second;
      if (current_is_duplicate) {
        warn(no, "duplicate fingerprint " + status.fingerprint.hex() + " ignored");
        continue;
      }
      statuses.push_back(std::move(status));
    } else if (keyword == "s" || keyword == "v" || keyword == "w" || keyword == "p") {
      if (statuses.empty() && !current_is_duplicate) {
        throw MalformedDocument(no, fmt::format("\"{}\" line before any \"r\" line", keyword));
      }
      if (current_is_duplicate) continue;
      RouterStatus& status = statuses.back();
      if (keyword == "s") {
        for (std::size_t i = 1; i < tokens.size(); ++i) status.flags.insert_token(tokens[i]);
      } else if (keyword == "v") {
        status.version = std::string(rest_after_keyword(line));
      } else if (keyword == "w") {
        for (std::size_t i = 1; i < tokens.size(); ++i) {
          if (!tokens[i].starts_with("Bandwidth=")) continue;
          auto bw = parse_uint<std::uint64_t>(tokens[i].substr(10));
          if (!bw) throw MalformedDocument(no, "non-numeric Bandwidth");
          status.bandwidth = *bw;
        }
      } else {
        if (tokens.size() != 3 || (tokens[1] != "accept" && tokens[1] != "reject")) {
          throw MalformedDocument(no, "\"p\" line needs accept|reject and a port list");
        }
        status.exit_policy_summary = std::string(rest_after_keyword(line));
      }
    } else if (keyword == "directory-footer") {
      in_footer = true;
    }
    // Everything else (headers, dir-source, m, a, ...) is not needed.
  }

  if (!valid_after) throw MalformedDocument(std::max<std::size_t>(reader.number(), 1),
                                            "missing valid-after");
  return Consensus(*valid_after, std::move(statuses));
}

std::string serialize_consensus(const Consensus& consensus) {
  std::string out;
  out.reserve(64 + consensus.size() * 160);
  out += "network-status-version 3\n";
  out += "vote-status consensus\n";
  out += "valid-after " + format_timestamp(consensus.valid_after()) + "\n";
  for (const RouterStatus& s : consensus) {
    const std::string published = format_timestamp(s.published);
    fmt::format_to(std::back_inserter(out), "r {} {} {} {} {} {}\n", s.nickname,
                   s.fingerprint.base64(), s.descriptor_digest.base64(), published,
                   s.address.str(), fmt::format("{} {}", s.or_port, s.dir_port));
    out += "s";
    for (const std::string& token : s.flags.tokens()) {
      out += ' ';
      out += token;
    }
    out += '\n';
    if (s.version) out += "v " + *s.version + "\n";
    if (s.bandwidth) fmt::format_to(std::back_inserter(out), "w Bandwidth={}\n", *s.bandwidth);
    if (s.exit_policy_summary) out += "p " + *s.exit_policy_summary + "\n";
  }
  out += "directory-footer\n";
  return out;
}

}  // namespace sybilscope
