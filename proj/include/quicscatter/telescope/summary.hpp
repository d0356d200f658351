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

#include <string>
#include <vector>

#include "quicscatter/telescope/ingest.hpp"
#include "quicscatter/telescope/prefix_table.hpp"

namespace quicscatter::telescope {

inline constexpr std::string_view kUnknownOperator = "Unknown";

// What the per-operator statistics need from one datagram.
struct DatagramSummary {
  std::string operator_label;
  double timestamp = 0.0;
  Ipv4Address src_ip;
  Ipv4Address dst_ip;
  wire::Direction direction = wire::Direction::Response;
  uint32_t length = 0;                   // UDP payload octets
  std::vector<wire::PacketType> types;   // in datagram order

  bool coalesced() const { return types.size() > 1; }
  bool operator==(const DatagramSummary&) const = default;
};

std::string operator_of(Ipv4Address ip, const PrefixTable& table);

DatagramSummary summarize(const CaptureRecord& record, std::string operator_label);

}  // namespace quicscatter::telescope
