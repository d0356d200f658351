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

#include "quicscatter/telescope/ingest.hpp"

#include <algorithm>
#include <unordered_map>

namespace quicscatter::telescope {

std::optional<CaptureRecord> make_record(wire::Datagram d, const FilterConfig& config, IngestCounters& counters) {
  auto direction = wire::classify_direction(d);
  if (direction == wire::Direction::NonQuic) {
    ++counters.non_quic;
    return std::nullopt;
  }
  auto scan = wire::scan_datagram(d.payload);
  if (scan.short_header && scan.packets.empty()) ++counters.short_header_datagrams;
  if (!wire::is_plausible_quic(d.payload, config.registry, config.policy)) {
    ++counters.implausible;
    return std::nullopt;
  }
  CaptureRecord record{std::move(d), direction, std::move(scan.packets)};
  ++counters.emitted;
  counters.long_header_packets += record.packets.size();
  return record;
}

CaptureIngestor::CaptureIngestor(const std::filesystem::path& path, FilterConfig config)
    : reader_(path), config_(std::move(config)) {}

std::optional<CaptureRecord> CaptureIngestor::next() {
  while (auto frame = reader_.next()) {
    ++counters_.frames;
    auto decoded = decode_frame(reader_.link_type(), *frame);
    if (decoded.verdict == FrameVerdict::Malformed) {
      ++counters_.malformed;
      continue;
    }
    if (decoded.verdict == FrameVerdict::NotUdp) {
      ++counters_.non_udp;
      continue;
    }
    if (auto record = make_record(std::move(decoded.datagram), config_, counters_)) return record;
  }
  // A truncated tail is one malformed record.
  if (reader_.truncated()) {
    ++counters_.malformed;
    ++counters_.frames;
  }
  return std::nullopt;
}

namespace {

void sort_by_time(std::vector<CaptureRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const CaptureRecord& a, const CaptureRecord& b) {
    return a.datagram.timestamp < b.datagram.timestamp;
  });
}

}  // namespace

IngestResult ingest(const std::filesystem::path& capture, const FilterConfig& config) {
  IngestResult result;
  CaptureIngestor ingestor(capture, config);
  while (auto record = ingestor.next()) result.records.push_back(std::move(*record));
  result.counters = ingestor.counters();
  sort_by_time(result.records);
  return result;
}

IngestResult ingest(std::span<const wire::Datagram> datagrams, const FilterConfig& config) {
  IngestResult result;
  for (const auto& d : datagrams) {
    ++result.counters.frames;
    if (auto record = make_record(d, config, result.counters)) result.records.push_back(std::move(*record));
  }
  sort_by_time(result.records);
  return result;
}

std::vector<CaptureRecord> sanitize(std::vector<CaptureRecord> records, const ScannerList& scanners,
                                    SanitizeCounters* counters) {
  SanitizeCounters local;
  std::vector<CaptureRecord> kept;
  kept.reserve(records.size());
  for (auto& r : records) {
    ++local.inspected;
    if (passes_sanitization(r, scanners)) {
      kept.push_back(std::move(r));
    } else {
      ++local.removed;
      local.removed_packets += r.packets.size();
    }
  }
  if (counters) *counters = local;
  return kept;
}

std::vector<Session> sessionize(std::span<const CaptureRecord> records, double idle_gap) {
  std::vector<Session> sessions;
  std::vector<double> last_seen;
  std::unordered_map<SessionKey, size_t> open;

  for (const auto& record : records) {
    const auto& d = record.datagram;
    for (const auto& packet : record.packets) {
      SessionKey key{d.src_ip, d.dst_ip, packet.scid, packet.dcid};
      auto it = open.find(key);
      if (it == open.end() || d.timestamp - last_seen[it->second] >= idle_gap) {
        Session s;
        s.key = key;
        s.direction = record.direction;
        s.version = packet.version;
        s.start_time = d.timestamp;
        s.src_port = d.src_port;
        s.dst_port = d.dst_port;
        sessions.push_back(std::move(s));
        last_seen.push_back(d.timestamp);
        open[key] = sessions.size() - 1;
        it = open.find(key);
      }
      auto& s = sessions[it->second];
      s.timeline.push_back(TimelineEntry{d.timestamp - s.start_time, packet.type,
                                         static_cast<uint32_t>(d.payload.size()), record.coalesced()});
      last_seen[it->second] = d.timestamp;
    }
  }
  return sessions;
}

}  // namespace quicscatter::telescope
