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

#include "quicscatter/telescope/pcap.hpp"

#include <cmath>

#include "quicscatter/common/error.hpp"

namespace quicscatter::telescope {

namespace {

constexpr uint32_t kMagicMicros = 0xa1b2c3d4;
constexpr uint32_t kMagicNanos = 0xa1b23c4d;
constexpr size_t kGlobalHeader = 24;
constexpr size_t kRecordHeader = 16;
constexpr uint32_t kMaxCaptureLength = 256 * 1024;

uint32_t bswap(uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xff00) | ((v << 8) & 0xff0000) | (v << 24);
}

uint16_t be16(const uint8_t* p) { return static_cast<uint16_t>(p[0] << 8 | p[1]); }
uint32_t be32(const uint8_t* p) { return uint32_t{p[0]} << 24 | uint32_t{p[1]} << 16 | uint32_t{p[2]} << 8 | p[3]; }

void put_le32(std::ostream& out, uint32_t v) {
  char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8), static_cast<char>(v >> 16), static_cast<char>(v >> 24)};
  out.write(b, 4);
}
void put_le16(std::ostream& out, uint16_t v) {
  char b[2] = {static_cast<char>(v), static_cast<char>(v >> 8)};
  out.write(b, 2);
}
void put_be16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}
void put_be32(std::vector<uint8_t>& out, uint32_t v) {
  put_be16(out, static_cast<uint16_t>(v >> 16));
  put_be16(out, static_cast<uint16_t>(v));
}

uint16_t ipv4_checksum(std::span<const uint8_t> header) {
  uint32_t sum = 0;
  for (size_t i = 0; i + 1 < header.size(); i += 2) sum += be16(&header[i]);
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  return static_cast<uint16_t>(~sum);
}

}  // namespace

PcapReader::PcapReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
  if (!in_) fail(Errc::UnreadableCapture, "cannot open " + path.string());
  uint8_t header[kGlobalHeader];
  if (!in_.read(reinterpret_cast<char*>(header), kGlobalHeader)) {
    fail(Errc::UnreadableCapture, path.string() + " is shorter than a pcap header");
  }
  uint32_t magic = uint32_t{header[0]} | uint32_t{header[1]} << 8 | uint32_t{header[2]} << 16 | uint32_t{header[3]} << 24;
  if (magic == kMagicMicros || magic == kMagicNanos) {
    swapped_ = false;
  } else if (bswap(magic) == kMagicMicros || bswap(magic) == kMagicNanos) {
    swapped_ = true;
    magic = bswap(magic);
  } else {
    fail(Errc::UnreadableCapture, path.string() + " is not a pcap file");
  }
  nanos_ = magic == kMagicNanos;
  uint32_t link = read_u32(header + 20) & 0x0fffffff;
  switch (link) {
    case 1: case 12: case 14: case 101: case 228:
      link_type_ = static_cast<LinkType>(link);
      break;
    default:
      fail(Errc::UnreadableCapture, "unsupported link type " + std::to_string(link));
  }
}

uint32_t PcapReader::read_u32(const uint8_t* p) const {
  uint32_t v = uint32_t{p[0]} | uint32_t{p[1]} << 8 | uint32_t{p[2]} << 16 | uint32_t{p[3]} << 24;
  return swapped_ ? bswap(v) : v;
}

std::optional<PcapFrame> PcapReader::next() {
  if (truncated_) return std::nullopt;
  uint8_t header[kRecordHeader];
  in_.read(reinterpret_cast<char*>(header), kRecordHeader);
  if (in_.gcount() == 0) return std::nullopt;
  if (in_.gcount() != static_cast<std::streamsize>(kRecordHeader)) {
    truncated_ = true;
    return std::nullopt;
  }
  uint32_t sec = read_u32(header);
  uint32_t frac = read_u32(header + 4);
  uint32_t caplen = read_u32(header + 8);
  PcapFrame frame;
  frame.original_length = read_u32(header + 12);
  frame.timestamp = static_cast<double>(sec) + static_cast<double>(frac) * (nanos_ ? 1e-9 : 1e-6);
  if (caplen > kMaxCaptureLength) {
    truncated_ = true;
    return std::nullopt;
  }
  frame.bytes.resize(caplen);
  if (!in_.read(reinterpret_cast<char*>(frame.bytes.data()), caplen)) {
    truncated_ = true;
    return std::nullopt;
  }
  return frame;
}

DecodedFrame decode_frame(LinkType link, const PcapFrame& frame) {
  DecodedFrame out;
  std::span<const uint8_t> bytes = frame.bytes;
  if (link == LinkType::Ethernet) {
    if (bytes.size() < 14) return out;
    size_t pos = 12;
    uint16_t ether_type = be16(&bytes[pos]);
    // 802.1Q / QinQ tags
    while ((ether_type == 0x8100 || ether_type == 0x88a8) && bytes.size() >= pos + 6) {
      pos += 4;
      ether_type = be16(&bytes[pos]);
    }
    if (ether_type != 0x0800) {
      out.verdict = FrameVerdict::NotUdp;
      return out;
    }
    bytes = bytes.subspan(pos + 2);
  }
  if (bytes.empty()) return out;
  if ((bytes[0] >> 4) != 4) {
    out.verdict = FrameVerdict::NotUdp;
    return out;
  }
  size_t ihl = size_t{bytes[0] & 0x0fu} * 4;
  if (ihl < 20 || bytes.size() < ihl) return out;
  uint16_t total = be16(&bytes[2]);
  if (total < ihl) return out;
  if (total < bytes.size()) bytes = bytes.first(total);  // drop link-layer trailer
  uint16_t frag = be16(&bytes[6]);
  if (bytes[9] != 17 || (frag & 0x1fff) != 0) {
    out.verdict = FrameVerdict::NotUdp;
    return out;
  }
  auto udp = bytes.subspan(ihl);
  if (udp.size() < 8) return out;
  uint16_t udp_len = be16(&udp[4]);
  if (udp_len < 8 || udp_len > udp.size()) return out;

  out.verdict = FrameVerdict::Udp;
  out.datagram.timestamp = frame.timestamp;
  out.datagram.src_ip = Ipv4Address(be32(&bytes[12]));
  out.datagram.dst_ip = Ipv4Address(be32(&bytes[16]));
  out.datagram.src_port = be16(&udp[0]);
  out.datagram.dst_port = be16(&udp[2]);
  out.datagram.payload.assign(udp.begin() + 8, udp.begin() + udp_len);
  return out;
}

PcapWriter::PcapWriter(std::ostream& out) : out_(out) {
  put_le32(out_, kMagicMicros);
  put_le16(out_, 2);
  put_le16(out_, 4);
  put_le32(out_, 0);  // thiszone
  put_le32(out_, 0);  // sigfigs
  put_le32(out_, 65535);
  put_le32(out_, static_cast<uint32_t>(LinkType::Raw));
}

void PcapWriter::write(const wire::Datagram& d) {
  std::vector<uint8_t> packet;
  const auto total = static_cast<uint16_t>(20 + 8 + d.payload.size());
  packet.reserve(total);
  packet.push_back(0x45);
  packet.push_back(0);
  put_be16(packet, total);
  put_be16(packet, ip_id_++);
  put_be16(packet, 0x4000);  // DF
  packet.push_back(64);
  packet.push_back(17);
  put_be16(packet, 0);
  put_be32(packet, d.src_ip.value());
  put_be32(packet, d.dst_ip.value());
  uint16_t checksum = ipv4_checksum(std::span<const uint8_t>(packet).first(20));
  packet[10] = static_cast<uint8_t>(checksum >> 8);
  packet[11] = static_cast<uint8_t>(checksum);
  put_be16(packet, d.src_port);
  put_be16(packet, d.dst_port);
  put_be16(packet, static_cast<uint16_t>(8 + d.payload.size()));
  put_be16(packet, 0);
  packet.insert(packet.end(), d.payload.begin(), d.payload.end());

  auto micros = static_cast<int64_t>(std::llround(d.timestamp * 1e6));
  put_le32(out_, static_cast<uint32_t>(micros / 1000000));
  put_le32(out_, static_cast<uint32_t>(micros % 1000000));
  put_le32(out_, static_cast<uint32_t>(packet.size()));
  put_le32(out_, static_cast<uint32_t>(packet.size()));
  out_.write(reinterpret_cast<const char*>(packet.data()), static_cast<std::streamsize>(packet.size()));
}

void write_capture(const std::filesystem::path& path, std::span<const wire::Datagram> datagrams) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::UnreadableCapture, "cannot write " + path.string());
  PcapWriter writer(out);
  for (const auto& d : datagrams) writer.write(d);
  if (!out) fail(Errc::UnreadableCapture, "write failed for " + path.string());
}

}  // namespace quicscatter::telescope
