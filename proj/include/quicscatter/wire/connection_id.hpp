// Copyright 2026 The quicscatter Authors
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
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace quicscatter::wire {

// QUIC connection ID: 0 to 20 octets. Unused trailing storage stays zero so
// the defaulted comparisons are exact byte comparisons.
class ConnectionId {
 public:
  static constexpr size_t kMaxLength = 20;

  ConnectionId() = default;
  // Throws Error(InvalidCidLength) when bytes.size() > 20.
  explicit ConnectionId(std::span<const uint8_t> bytes);

  static std::optional<ConnectionId> from_hex(std::string_view text);

  size_t size() const { return length_; }
  bool empty() const { return length_ == 0; }
  std::span<const uint8_t> bytes() const { return {bytes_.data(), length_}; }
  uint8_t operator[](size_t i) const { return bytes_[i]; }
  std::string to_hex() const;

  auto operator<=>(const ConnectionId&) const = default;

 private:
  std::array<uint8_t, kMaxLength> bytes_{};
  uint8_t length_ = 0;
};

}  // namespace quicscatter::wire

template <>
struct std::hash<quicscatter::wire::ConnectionId> {
  size_t operator()(const quicscatter::wire::ConnectionId& cid) const noexcept {
    uint64_t h = 1469598103934665603ULL ^ cid.size();
    for (uint8_t b : cid.bytes()) h = (h ^ b) * 1099511628211ULL;
    return static_cast<size_t>(h);
  }
};
