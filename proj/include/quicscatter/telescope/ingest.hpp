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
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "quicscatter/telescope/pcap.hpp"
#include "quicscatter/telescope/prefix_table.hpp"
#include "quicscatter/wire/datagram.hpp"
#include "quicscatter/wire/packet.hpp"
#include "quicscatter/wire/version_registry.hpp"

namespace quicscatter::telescope {

struct CaptureRecord {
  wire::Datagram datagram;
  wire::Direction direction = wire::Direction::NonQuic;
  std::vector<wire::LongHeader> packets;  // non-empty for every emitted record

  bool coalesced() const { return packets.size() > 1; }
};

struct FilterConfig {
  wire::VersionRegistry registry = wire::VersionRegistry::defaults();
  wire::PlausibilityPolicy policy;
};

struct IngestCounters {
  uint64_t frames = 0;
  uint64_t malformed = 0;
  uint64_t non_udp = 0;
  uint64_t non_quic = 0;      // UDP without port 443 on either side
  uint64_t implausible = 0;   // port 443 but failed the payload check
  uint64_t emitted = 0;
  uint64_t long_header_packets = 0;
  uint64_t short_header_datagrams = 0;

  uint64_t skipped() const { return malformed + non_udp + non_quic + implausible; }
};

// Classifies one datagram; nullopt means the datagram is counted but dropped.
std::optional<CaptureRecord> make_record(wire::Datagram d, const FilterConfig& config, IngestCounters& counters);

// Pull-based reader over a capture file. Records come out in file order.
class CaptureIngestor {
 public:
  // Throws Error(UnreadableCapture).
  CaptureIngestor(const std::filesystem::path& path, FilterConfig config);

  std::optional<CaptureRecord> next();
  const IngestCounters& counters() const { return counters_; }

 private:
  PcapReader reader_;
  FilterConfig config_;
  IngestCounters counters_;
};

struct IngestResult {
  std::vector<CaptureRecord> records;  // stable-sorted by timestamp
  IngestCounters counters;
};

IngestResult ingest(const std::filesystem::path& capture, const FilterConfig& config);
IngestResult ingest(std::span<const wire::Datagram> datagrams, const FilterConfig& config);

struct SanitizeCounters {
  uint64_t inspected = 0;
  uint64_t removed = 0;          // records
  uint64_t removed_packets = 0;  // long-header packets inside removed records

  double removed_fraction() const { return inspected == 0 ? 0.0 : static_cast<double>(removed) / static_cast<double>(inspected); }
};

// Requests from listed scanners are dropped; responses always pass.
inline bool passes_sanitization(const CaptureRecord& r, const ScannerList& scanners) {
  return r.direction != wire::Direction::Request || !scanners.contains(r.datagram.src_ip);
}

std::vector<CaptureRecord> sanitize(std::vector<CaptureRecord> records, const ScannerList& scanners,
                                    SanitizeCounters* counters = nullptr);

struct SessionKey {
  Ipv4Address src_ip;
  Ipv4Address dst_ip;
  wire::ConnectionId scid;
  wire::ConnectionId dcid;

  auto operator<=>(const SessionKey&) const = default;
};

struct TimelineEntry {
  double offset = 0.0;  // seconds since the session's first packet
  wire::PacketType type = wire::PacketType::Initial;
  uint32_t datagram_length = 0;
  bool coalesced = false;

  bool operator==(const TimelineEntry&) const = default;
};

struct Session {
  SessionKey key;
  wire::Direction direction = wire::Direction::Response;
  uint32_t version = 0;  // of the first packet
  double start_time = 0.0;
  uint16_t src_port = 0;
  uint16_t dst_port = 0;
  std::vector<TimelineEntry> timeline;

  bool operator==(const Session&) const = default;
};

inline constexpr double kDefaultIdleGap = 60.0;

// Groups packets by (src, dst, SCID, DCID). A gap of idle_gap or more under
// the same key opens a new session. Sessions are returned in start order.
std::vector<Session> sessionize(std::span<const CaptureRecord> records, double idle_gap = kDefaultIdleGap);

}  // namespace quicscatter::telescope

template <>
struct std::hash<quicscatter::telescope::SessionKey> {
  size_t operator()(const quicscatter::telescope::SessionKey& k) const noexcept {
    size_t h = std::hash<quicscatter::wire::ConnectionId>{}(k.scid);
    h ^= std::hash<quicscatter::wire::ConnectionId>{}(k.dcid) * 31;
    h ^= (static_cast<size_t>(k.src_ip.value()) << 32 | k.dst_ip.value()) * 0x9e3779b97f4a7c15ULL;
    return h;
  }
};
