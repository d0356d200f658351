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

#include "quicscatter/wire/packet.hpp"

#include <algorithm>

#include "quicscatter/wire/varint.hpp"

namespace quicscatter::wire {

namespace {

constexpr uint8_t kFormBit = 0x80;
constexpr uint8_t kFixedBit = 0x40;

uint32_t read_u32(std::span<const uint8_t> in) {
  return uint32_t{in[0]} << 24 | uint32_t{in[1]} << 16 | uint32_t{in[2]} << 8 | in[3];
}

void append_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<uint8_t>(v >> shift));
}

ParseOutcome failure(Errc code) { return ParseOutcome{std::nullopt, code}; }

// Reads a one-octet length followed by that many CID octets.
std::optional<Errc> read_cid(std::span<const uint8_t> in, size_t& pos, ConnectionId& out) {
  if (pos >= in.size()) return Errc::TruncatedPacket;
  size_t length = in[pos++];
  if (length > ConnectionId::kMaxLength) return Errc::InvalidCidLength;
  if (in.size() - pos < length) return Errc::TruncatedPacket;
  out = ConnectionId(in.subspan(pos, length));
  pos += length;
  return std::nullopt;
}

}  // namespace

std::string_view packet_type_name(PacketType type) {
  switch (type) {
    case PacketType::Initial: return "Initial";
    case PacketType::ZeroRtt: return "0-RTT";
    case PacketType::Handshake: return "Handshake";
    case PacketType::Retry: return "Retry";
    case PacketType::VersionNegotiation: return "VersionNegotiation";
  }
  return "?";
}

std::optional<PacketType> packet_type_from_name(std::string_view name) {
  for (auto t : {PacketType::Initial, PacketType::ZeroRtt, PacketType::Handshake, PacketType::Retry,
                 PacketType::VersionNegotiation}) {
    if (packet_type_name(t) == name) return t;
  }
  return std::nullopt;
}

ParseOutcome try_parse_long_header(std::span<const uint8_t> payload, size_t offset) noexcept {
  if (offset >= payload.size()) return failure(Errc::TruncatedPacket);
  auto in = payload.subspan(offset);
  const uint8_t first = in[0];
  if ((first & kFormBit) == 0) return failure(Errc::NotLongHeader);
  if (in.size() < 5) return failure(Errc::TruncatedPacket);

  LongHeader h;
  h.version = read_u32(in.subspan(1, 4));
  size_t pos = 5;
  if (auto err = read_cid(in, pos, h.dcid)) return failure(*err);
  if (auto err = read_cid(in, pos, h.scid)) return failure(*err);

  if (h.version == 0) {
    h.type = PacketType::VersionNegotiation;
    h.flags = first & 0x7f;
    size_t rest = in.size() - pos;
    if (rest % 4 != 0) return failure(Errc::TruncatedPacket);
    for (size_t i = pos; i < in.size(); i += 4) h.supported_versions.push_back(read_u32(in.subspan(i, 4)));
    h.header_length = pos;
    h.wire_length = in.size();
    return ParseOutcome{std::move(h), {}};
  }

  h.type = static_cast<PacketType>((first >> 4) & 0x03);
  h.flags = first & 0x0f;

  if (h.type == PacketType::Retry) {
    // Retry token and integrity tag run to the end of the datagram.
    h.header_length = pos;
    h.wire_length = in.size();
    return ParseOutcome{std::move(h), {}};
  }

  if (h.type == PacketType::Initial) {
    auto token_len = read_varint(in.subspan(pos));
    if (!token_len) return failure(Errc::TruncatedPacket);
    pos += token_len->length;
    if (in.size() - pos < token_len->value) return failure(Errc::TruncatedPacket);
    h.token.assign(in.begin() + static_cast<ptrdiff_t>(pos),
                   in.begin() + static_cast<ptrdiff_t>(pos + token_len->value));
    pos += token_len->value;
  }

  auto length = read_varint(in.subspan(pos));
  if (!length) return failure(Errc::TruncatedPacket);
  pos += length->length;
  if (in.size() - pos < length->value) return failure(Errc::TruncatedPacket);
  h.payload_length = length->value;
  h.header_length = pos;
  h.wire_length = pos + length->value;
  return ParseOutcome{std::move(h), {}};
}

LongHeader parse_long_header(std::span<const uint8_t> payload, size_t offset) {
  auto outcome = try_parse_long_header(payload, offset);
  if (!outcome.header) {
    fail(outcome.error, "long header at offset " + std::to_string(offset) + " of " +
                            std::to_string(payload.size()) + "-octet payload");
  }
  return std::move(*outcome.header);
}

std::span<const uint8_t> packet_payload(std::span<const uint8_t> datagram, size_t offset, const LongHeader& h) {
  return datagram.subspan(offset + h.header_length, h.wire_length - h.header_length);
}

std::vector<uint8_t> encode_long_header(const LongHeader& h, std::span<const uint8_t> payload) {
  if (h.dcid.size() > ConnectionId::kMaxLength || h.scid.size() > ConnectionId::kMaxLength) {
    fail(Errc::InvalidCidLength, "connection ID longer than 20 octets");
  }
  const bool negotiation = h.type == PacketType::VersionNegotiation;
  if (negotiation != (h.version == 0)) {
    fail(Errc::InvalidConfig, "version 0 is reserved for version negotiation");
  }
  if (negotiation && !payload.empty()) {
    fail(Errc::InvalidConfig, "version negotiation carries supported_versions, not a payload");
  }

  std::vector<uint8_t> out;
  out.reserve(64 + payload.size() + h.token.size());
  if (negotiation) {
    out.push_back(static_cast<uint8_t>(kFormBit | (h.flags & 0x7f)));
  } else {
    out.push_back(static_cast<uint8_t>(kFormBit | kFixedBit | static_cast<uint8_t>(h.type) << 4 | (h.flags & 0x0f)));
  }
  append_u32(out, h.version);
  out.push_back(static_cast<uint8_t>(h.dcid.size()));
  out.insert(out.end(), h.dcid.bytes().begin(), h.dcid.bytes().end());
  out.push_back(static_cast<uint8_t>(h.scid.size()));
  out.insert(out.end(), h.scid.bytes().begin(), h.scid.bytes().end());

  switch (h.type) {
    case PacketType::VersionNegotiation:
      for (uint32_t v : h.supported_versions) append_u32(out, v);
      return out;
    case PacketType::Retry:
      break;
    case PacketType::Initial:
      append_varint(out, h.token.size());
      out.insert(out.end(), h.token.begin(), h.token.end());
      [[fallthrough]];
    case PacketType::ZeroRtt:
    case PacketType::Handshake:
      append_varint(out, payload.size());
      break;
  }
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

DatagramScan scan_datagram(std::span<const uint8_t> datagram) noexcept {
  DatagramScan scan;
  size_t offset = 0;
  while (offset < datagram.size()) {
    const uint8_t first = datagram[offset];
    if (first == 0x00) break;
    if ((first & kFormBit) == 0) {
      scan.short_header = true;
      break;
    }
    auto outcome = try_parse_long_header(datagram, offset);
    if (!outcome.header) break;
    offset += outcome.header->wire_length;
    scan.packets.push_back(std::move(*outcome.header));
  }
  scan.consumed = offset;
  auto rest = datagram.subspan(offset);
  if (std::all_of(rest.begin(), rest.end(), [](uint8_t b) { return b == 0; })) {
    scan.trailing_padding = rest.size();
    scan.fully_consumed = true;
  }
  return scan;
}

std::vector<LongHeader> split_coalesced(std::span<const uint8_t> datagram) noexcept {
  return scan_datagram(datagram).packets;
}

}  // namespace quicscatter::wire
