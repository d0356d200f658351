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

#include "quicscatter/common/ip.hpp"

#include <arpa/inet.h>

#include <charconv>

#include "quicscatter/common/error.hpp"

namespace quicscatter {

std::optional<Ipv4Address> Ipv4Address::parse(std::string_view text) {
  std::string buf(text);
  in_addr addr{};
  if (inet_pton(AF_INET, buf.c_str(), &addr) != 1) return std::nullopt;
  return Ipv4Address(ntohl(addr.s_addr));
}

Ipv4Address Ipv4Address::from_string(std::string_view text) {
  auto ip = parse(text);
  if (!ip) fail(Errc::InvalidConfig, "bad IPv4 address '" + std::string(text) + "'");
  return *ip;
}

std::string Ipv4Address::to_string() const {
  in_addr addr{};
  addr.s_addr = htonl(value_);
  char buf[INET_ADDRSTRLEN] = {};
  inet_ntop(AF_INET, &addr, buf, sizeof(buf));
  return buf;
}

std::optional<Ipv4Prefix> Ipv4Prefix::parse(std::string_view text) {
  int length = 32;
  auto slash = text.find('/');
  auto addr_text = text.substr(0, slash);
  if (slash != std::string_view::npos) {
    auto len_text = text.substr(slash + 1);
    auto [ptr, ec] = std::from_chars(len_text.data(), len_text.data() + len_text.size(), length);
    if (ec != std::errc{} || ptr != len_text.data() + len_text.size() || length < 0 || length > 32) {
      return std::nullopt;
    }
  }
  auto ip = Ipv4Address::parse(addr_text);
  if (!ip) return std::nullopt;
  Ipv4Prefix prefix{*ip, length};
  // Host bits are cleared so equal prefixes compare equal.
  prefix.network = Ipv4Address(ip->value() & prefix.mask());
  return prefix;
}

Ipv4Prefix Ipv4Prefix::from_string(std::string_view text) {
  auto prefix = parse(text);
  if (!prefix) fail(Errc::InvalidConfig, "bad IPv4 prefix '" + std::string(text) + "'");
  return *prefix;
}

Ipv4Address Ipv4Prefix::at(uint64_t offset) const {
  uint64_t host = offset % size();
  return Ipv4Address(network.value() | static_cast<uint32_t>(host));
}

std::string Ipv4Prefix::to_string() const {
  return network.to_string() + "/" + std::to_string(length);
}

}  // namespace quicscatter
