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
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "quicscatter/wire/datagram.hpp"

namespace quicscatter::telescope {

// Link types from the pcap registry that the reader understands.
enum class LinkType : uint32_t {
  Ethernet = 1,
  RawBsd = 12,
  RawOpenBsd = 14,
  Raw = 101,
  Ipv4 = 228,
};

struct PcapFrame {
  double timestamp = 0.0;
  std::vector<uint8_t> bytes;  // captured octets (may be shorter than the original frame)
  uint32_t original_length = 0;
};

// Sequential reader for classic (non-ng) pcap files, either byte order,
// microsecond or nanosecond timestamps.
class PcapReader {
 public:
  // Throws Error(UnreadableCapture) if the file is missing or not pcap.
  explicit PcapReader(const std::filesystem::path& path);

  LinkType link_type() const { return link_type_; }

  // Next frame, or nullopt at end of file. A record header that promises
  // more octets than the file holds sets truncated() and ends the stream.
  std::optional<PcapFrame> next();
  bool truncated() const { return truncated_; }

 private:
  uint32_t read_u32(const uint8_t* p) const;

  std::ifstream in_;
  bool swapped_ = false;
  bool nanos_ = false;
  bool truncated_ = false;
  LinkType link_type_ = LinkType::Ethernet;
};

enum class FrameVerdict { Udp, NotUdp, Malformed };

struct DecodedFrame {
  FrameVerdict verdict = FrameVerdict::Malformed;
  wire::Datagram datagram;
};

// Strips link, IPv4 and UDP headers. Non-first fragments and non-IPv4
// frames are NotUdp; inconsistent lengths are Malformed.
DecodedFrame decode_frame(LinkType link, const PcapFrame& frame);

// Writes raw-IPv4 pcap records (microsecond timestamps, UDP checksum 0).
class PcapWriter {
 public:
  explicit PcapWriter(std::ostream& out);
  void write(const wire::Datagram& d);

 private:
  std::ostream& out_;
  uint16_t ip_id_ = 0;
};

void write_capture(const std::filesystem::path& path, std::span<const wire::Datagram> datagrams);

}  // namespace quicscatter::telescope
