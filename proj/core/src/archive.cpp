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

#include <cstring>
#include <string>

#include <lzma.h>

#include "sybilscope/error.hpp"
#include "sybilscope/sources.hpp"

namespace sybilscope {
namespace {

constexpr std::size_t kBlock = 512;

std::string_view field(std::string_view header, std::size_t offset, std::size_t len) {
  std::string_view f = header.substr(offset, len);
  const auto nul = f.find('\0');
  return nul == std::string_view::npos ? f : f.substr(0, nul);
}

std::uint64_t parse_octal(std::string_view f) {
  std::uint64_t value = 0;
  for (char c : f) {
    if (c == ' ' || c == '\0') {
      if (value != 0) break;
      continue;
    }
    if (c < '0' || c > '7') throw Error("tar: malformed octal field");
    value = value * 8 + static_cast<std::uint64_t>(c - '0');
  }
  return value;
}

std::uint64_t parse_size(std::string_view header) {
  const std::string_view raw = header.substr(124, 12);
  if (static_cast<unsigned char>(raw[0]) & 0x80) {
    // GNU base-256 encoding for large members.
    std::uint64_t value = 0;
    for (std::size_t i = 1; i < raw.size(); ++i) {
      value = (value << 8) | static_cast<unsigned char>(raw[i]);
    }
    return value;
  }
  return parse_octal(raw);
}

// "NN path=value\n" records of a pax extended header.
std::string pax_path(std::string_view data) {
  std::string path;
  while (!data.empty()) {
    const auto space = data.find(' ');
    if (space == std::string_view::npos) break;
    std::size_t len = 0;
    for (char c : data.substr(0, space)) {
      if (c < '0' || c > '9') return path;
      len = len * 10 + static_cast<std::size_t>(c - '0');
    }
    if (len == 0 || len > data.size()) break;
    std::string_view record = data.substr(space + 1, len - space - 1);
    if (!record.empty() && record.back() == '\n') record.remove_suffix(1);
    if (record.starts_with("path=")) path = std::string(record.substr(5));
    data.remove_prefix(len);
  }
  return path;
}

}  // namespace

std::vector<Document> read_tar(std::string_view bytes, const std::string& origin) {
  std::vector<Document> out;
  std::string long_name;
  std::size_t pos = 0;
  while (pos + kBlock <= bytes.size()) {
    const std::string_view header = bytes.substr(pos, kBlock);
    if (header.find_first_not_of('\0') == std::string_view::npos) break;  // end marker
    const std::uint64_t size = parse_size(header);
    const char type = header[156];
    pos += kBlock;
    if (size > bytes.size() - pos) throw Error("tar: truncated member in " + origin);
    const std::string_view data = bytes.substr(pos, size);
    pos += (size + kBlock - 1) / kBlock * kBlock;

    if (type == 'L') {
      long_name = std::string(field(data, 0, data.size()));
      continue;
    }
    if (type == 'x') {
      long_name = pax_path(data);
      continue;
    }
    if (type == 'g') continue;

    std::string name;
    if (!long_name.empty()) {
      name = std::move(long_name);
      long_name.clear();
    } else {
      const std::string_view prefix = field(header, 345, 155);
      name = std::string(field(header, 0, 100));
      if (std::memcmp(header.data() + 257, "ustar", 5) == 0 && !prefix.empty()) {
        name = std::string(prefix) + "/" + name;
      }
    }
    if (type != '0' && type != '\0') continue;  // directories, links, ...
    out.push_back({origin + ":" + name, std::string(data)});
  }
  return out;
}

std::string xz_decompress(std::string_view bytes) {
  lzma_stream stream = LZMA_STREAM_INIT;
  if (lzma_stream_decoder(&stream, UINT64_MAX, LZMA_CONCATENATED) != LZMA_OK) {
    throw Error("xz: decoder initialisation failed");
  }
  std::string out;
  std::string buffer(1 << 16, '\0');
  stream.next_in = reinterpret_cast<const std::uint8_t*>(bytes.data());
  stream.avail_in = bytes.size();
  lzma_ret ret = LZMA_OK;
  while (ret == LZMA_OK) {
    stream.next_out = reinterpret_cast<std::uint8_t*>(buffer.data());
    stream.avail_out = buffer.size();
    ret = lzma_code(&stream, stream.avail_in == 0 ? LZMA_FINISH : LZMA_RUN);
    out.append(buffer.data(), buffer.size() - stream.avail_out);
  }
  lzma_end(&stream);
  if (ret != LZMA_STREAM_END) throw Error("xz: corrupt or truncated stream");
  return out;
}

}  // namespace sybilscope
