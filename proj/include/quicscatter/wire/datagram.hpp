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

#include <cstdint>
#include <string_view>
#include <vector>

#include "quicscatter/common/ip.hpp"

namespace quicscatter::wire {

inline constexpr uint16_t kQuicPort = 443;

struct Datagram {
  double timestamp = 0.0;  // seconds
  Ipv4Address src_ip;
  Ipv4Address dst_ip;
  uint16_t src_port = 0;
  uint16_t dst_port = 0;
  std::vector<uint8_t> payload;

  bool operator==(const Datagram&) const = default;
};

enum class Direction : uint8_t { Request, Response, NonQuic };

std::string_view direction_name(Direction d);

// Source port 443 marks a server response (this also covers 443 -> 443),
// destination port 443 a client request.
constexpr Direction classify_direction(const Datagram& d) {
  if (d.src_port == kQuicPort) return Direction::Response;
  if (d.dst_port == kQuicPort) return Direction::Request;
  return Direction::NonQuic;
}

}  // namespace quicscatter::wire
