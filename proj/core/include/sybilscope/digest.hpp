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

#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace sybilscope {

namespace detail {

std::optional<std::array<std::uint8_t, 20>> decode_hex20(std::string_view text);
std::optional<std::array<std::uint8_t, 20>> decode_base64_20(std::string_view text);
std::string encode_hex(const std::array<std::uint8_t, 20>& bytes);
std::string encode_base64_nopad(const std::array<std::uint8_t, 20>& bytes);

}  // namespace detail

/// A 20-byte SHA-1 sized digest. The tag keeps relay identities and
/// descriptor digests from being mixed up.
template <class Tag>
class Digest20 {
 public:
  using Bytes = std::array<std::uint8_t, 20>;

  constexpr Digest20() = default;
  constexpr explicit Digest20(const Bytes& bytes) : bytes_(bytes) {}

  /// Accepts 40 hex characters, upper or lower case, optionally split into
  /// space-separated groups (descriptor "fingerprint" lines use 4-char groups).
  static std::optional<Digest20> from_hex(std::string_view text) {
    std::string compact;
    compact.reserve(40);
    for (char c : text) {
      if (c != ' ') compact.push_back(c);
    }
    auto bytes = detail::decode_hex20(compact);
    if (!bytes) return std::nullopt;
    return Digest20(*bytes);
  }

  /// Unpadded base64 as used in consensus "r" lines (27 characters).
  static std::optional<Digest20> from_base64(std::string_view text) {
    auto bytes = detail::decode_base64_20(text);
    if (!bytes) return std::nullopt;
    return Digest20(*bytes);
  }

  /// 40 uppercase hex characters.
  std::string hex() const { return detail::encode_hex(bytes_); }
  std::string base64() const { return detail::encode_base64_nopad(bytes_); }

  const Bytes& bytes() const noexcept { return bytes_; }

  friend auto operator<=>(const Digest20&, const Digest20&) = default;

 private:
  Bytes bytes_{};
};

struct FingerprintTag {};
struct DescriptorDigestTag {};

/// Relay identity: hash of the relay's identity key.
using Fingerprint = Digest20<FingerprintTag>;
using DescriptorDigest = Digest20<DescriptorDigestTag>;

}  // namespace sybilscope

template <class Tag>
struct std::hash<sybilscope::Digest20<Tag>> {
  std::size_t operator()(const sybilscope::Digest20<Tag>& d) const noexcept {
    // The digest is already uniformly distributed.
    std::size_t h = 0;
    for (std::size_t i = 0; i < sizeof(std::size_t); ++i) {
      h = (h << 8) | d.bytes()[i];
    }
    return h;
  }
};
