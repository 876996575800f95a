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

#include "sybilscope/digest.hpp"

namespace sybilscope::detail {
namespace {

constexpr char kHexDigits[] = "0123456789ABCDEF";
constexpr char kBase64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

int base64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

}  // namespace

std::optional<std::array<std::uint8_t, 20>> decode_hex20(std::string_view text) {
  if (text.size() != 40) return std::nullopt;
  std::array<std::uint8_t, 20> out{};
  for (std::size_t i = 0; i < 20; ++i) {
    const int hi = hex_value(text[2 * i]);
    const int lo = hex_value(text[2 * i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return out;
}

std::optional<std::array<std::uint8_t, 20>> decode_base64_20(std::string_view text) {
  // 20 bytes = 160 bits = 26 full sextets + 4 bits; optional '=' padding.
  while (!text.empty() && text.back() == '=') text.remove_suffix(1);
  if (text.size() != 27) return std::nullopt;
  std::array<std::uint8_t, 20> out{};
  std::uint32_t acc = 0;
  int bits = 0;
  std::size_t pos = 0;
  for (char c : text) {
    const int v = base64_value(c);
    if (v < 0) return std::nullopt;
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      if (pos == out.size()) return std::nullopt;
      out[pos++] = static_cast<std::uint8_t>((acc >> bits) & 0xFF);
    }
  }
  // The two leftover bits of the last sextet must be zero (canonical form).
  if (pos != out.size() || (acc & ((1U << bits) - 1)) != 0) return std::nullopt;
  return out;
}

std::string encode_hex(const std::array<std::uint8_t, 20>& bytes) {
  std::string out;
  out.reserve(40);
  for (std::uint8_t b : bytes) {
    out.push_back(kHexDigits[b >> 4]);
    out.push_back(kHexDigits[b & 0x0F]);
  }
  return out;
}

std::string encode_base64_nopad(const std::array<std::uint8_t, 20>& bytes) {
  std::string out;
  out.reserve(27);
  std::uint32_t acc = 0;
  int bits = 0;
  for (std::uint8_t b : bytes) {
    acc = (acc << 8) | b;
    bits += 8;
    while (bits >= 6) {
      bits -= 6;
      out.push_back(kBase64Alphabet[(acc >> bits) & 0x3F]);
    }
  }
  if (bits > 0) out.push_back(kBase64Alphabet[(acc << (6 - bits)) & 0x3F]);
  return out;
}

}  // namespace sybilscope::detail
