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
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "quicscatter/common/error.hpp"
#include "quicscatter/wire/connection_id.hpp"

namespace quicscatter::wire {

enum class PacketType : uint8_t { Initial, ZeroRtt, Handshake, Retry, VersionNegotiation };

std::string_view packet_type_name(PacketType type);
std::optional<PacketType> packet_type_from_name(std::string_view name);

// A long-header packet as it appears on the wire. Length fields
// (payload_length, header_length, wire_length) describe the parsed bytes;
// the encoder derives them from the payload it is given.
struct LongHeader {
  PacketType type = PacketType::Initial;
  uint32_t version = 1;
  ConnectionId dcid;
  ConnectionId scid;
  // Low four bits of the first octet (low seven for version negotiation).
  uint8_t flags = 0;
  std::vector<uint8_t> token;                  // Initial only
  std::optional<uint64_t> payload_length;      // absent for Retry / VersionNegotiation
  std::vector<uint32_t> supported_versions;    // VersionNegotiation only
  size_t header_length = 0;                    // octets before the payload
  size_t wire_length = 0;                      // total octets consumed

  size_t token_length() const { return token.size(); }

  bool operator==(const LongHeader&) const = default;
};

struct ParseOutcome {
  std::optional<LongHeader> header;
  Errc error = Errc::TruncatedPacket;  // meaningful only when header is empty
};

// Non-throwing core used by the scanners; never reads outside `payload`.
ParseOutcome try_parse_long_header(std::span<const uint8_t> payload, size_t offset) noexcept;

// Throws Error(TruncatedPacket | InvalidCidLength | NotLongHeader).
LongHeader parse_long_header(std::span<const uint8_t> payload, size_t offset);

// Bytes of the packet payload (after the header) for a header parsed from `datagram`.
std::span<const uint8_t> packet_payload(std::span<const uint8_t> datagram, size_t offset, const LongHeader& h);

// Serializes `h` followed by `payload`. For version negotiation the payload
// must be empty and h.supported_versions is written instead.
std::vector<uint8_t> encode_long_header(const LongHeader& h, std::span<const uint8_t> payload);

struct DatagramScan {
  std::vector<LongHeader> packets;
  size_t consumed = 0;          // octets covered by parsed packets
  size_t trailing_padding = 0;  // zero octets after the last packet, when all remaining are zero
  bool short_header = false;    // scanning stopped at a short-header first octet
  bool fully_consumed = false;  // consumed + trailing_padding == datagram size
};

// Walks coalesced packets: stops at a 0x00 octet on a packet boundary, at a
// short header, or at the first parse failure.
DatagramScan scan_datagram(std::span<const uint8_t> datagram) noexcept;

std::vector<LongHeader> split_coalesced(std::span<const uint8_t> datagram) noexcept;

}  // namespace quicscatter::wire
