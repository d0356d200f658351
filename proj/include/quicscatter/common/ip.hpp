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

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace quicscatter {

// IPv4 address in host byte order. Only IPv4 is ingested today; the family
// tag keeps the door open for a v6 variant without changing call sites.
class Ipv4Address {
 public:
  static constexpr int kFamily = 4;

  constexpr Ipv4Address() = default;
  constexpr explicit Ipv4Address(uint32_t value) : value_(value) {}

  static std::optional<Ipv4Address> parse(std::string_view text);
  // Throws Error(InvalidConfig) on malformed input.
  static Ipv4Address from_string(std::string_view text);

  constexpr uint32_t value() const { return value_; }
  std::string to_string() const;

  constexpr auto operator<=>(const Ipv4Address&) const = default;

 private:
  uint32_t value_ = 0;
};

struct Ipv4Prefix {
  Ipv4Address network;
  int length = 32;

  static std::optional<Ipv4Prefix> parse(std::string_view text);
  static Ipv4Prefix from_string(std::string_view text);

  uint32_t mask() const { return length == 0 ? 0u : ~uint32_t{0} << (32 - length); }
  bool contains(Ipv4Address ip) const { return (ip.value() & mask()) == network.value(); }
  // Address at `offset` inside the prefix (wraps within the host part).
  Ipv4Address at(uint64_t offset) const;
  uint64_t size() const { return uint64_t{1} << (32 - length); }
  std::string to_string() const;

  auto operator<=>(const Ipv4Prefix&) const = default;
};

}  // namespace quicscatter

template <>
struct std::hash<quicscatter::Ipv4Address> {
  size_t operator()(const quicscatter::Ipv4Address& ip) const noexcept {
    return std::hash<uint32_t>{}(ip.value());
  }
};
