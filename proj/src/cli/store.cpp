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

#include "quicscatter/cli/store.hpp"

#include <cstdio>

#include "quicscatter/common/error.hpp"
#include "quicscatter/common/text.hpp"

namespace quicscatter::cli {

namespace {

std::string hex_version(uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08x", v);
  return buf;
}

[[noreturn]] void bad_field(const std::string& field, const std::string& value) {
  fail(Errc::MalformedRecord, "bad " + field + " value '" + value + "'");
}

const std::string& field(const Record& r, const std::string& name) {
  auto it = r.find(name);
  if (it == r.end()) fail(Errc::MalformedRecord, "missing column " + name);
  return it->second;
}

Ipv4Address ip_field(const Record& r, const std::string& name) {
  auto ip = Ipv4Address::parse(field(r, name));
  if (!ip) bad_field(name, field(r, name));
  return *ip;
}

wire::ConnectionId cid_field(const Record& r, const std::string& name) {
  const auto& text = field(r, name);
  if (text.empty()) return {};
  auto cid = wire::ConnectionId::from_hex(text);
  if (!cid) bad_field(name, text);
  return *cid;
}

template <typename T>
T number(const std::string& name, const std::string& text) {
  try {
    size_t used = 0;
    T value{};
    if constexpr (std::is_floating_point_v<T>) {
      value = static_cast<T>(std::stod(text, &used));
    } else {
      value = static_cast<T>(std::stoull(text, &used, 0));
    }
    if (used != text.size()) bad_field(name, text);
    return value;
  } catch (const std::logic_error&) {
    bad_field(name, text);
  }
}

wire::Direction direction_field(const Record& r) {
  const auto& text = field(r, "direction");
  for (auto d : {wire::Direction::Request, wire::Direction::Response, wire::Direction::NonQuic})
    if (wire::direction_name(d) == text) return d;
  bad_field("direction", text);
}

wire::PacketType type_of(const std::string& text) {
  auto t = wire::packet_type_from_name(text);
  if (!t) bad_field("packet type", text);
  return *t;
}

}  // namespace

Table session_table(const std::vector<StoredSession>& sessions) {
  Table t({"operator", "src_ip", "dst_ip", "scid", "dcid", "direction", "version", "start_time", "src_port",
           "dst_port", "timeline"});
  for (const auto& [op, s] : sessions) {
    std::string timeline;
    for (const auto& e : s.timeline) {
      if (!timeline.empty()) timeline += ';';
      timeline += format_double(e.offset) + "/" + std::string(wire::packet_type_name(e.type)) + "/" +
                  std::to_string(e.datagram_length) + "/" + (e.coalesced ? "1" : "0");
    }
    t.add({op, s.key.src_ip.to_string(), s.key.dst_ip.to_string(), s.key.scid.to_hex(), s.key.dcid.to_hex(),
           std::string(wire::direction_name(s.direction)), hex_version(s.version), format_double(s.start_time),
           s.src_port, s.dst_port, timeline});
  }
  return t;
}

std::vector<StoredSession> read_sessions(const std::filesystem::path& path) {
  std::vector<StoredSession> out;
  size_t row = 0;
  for (const auto& r : read_table(path)) {
    ++row;
    try {
      StoredSession s;
      s.operator_label = field(r, "operator");
      auto& ses = s.session;
      ses.key.src_ip = ip_field(r, "src_ip");
      ses.key.dst_ip = ip_field(r, "dst_ip");
      ses.key.scid = cid_field(r, "scid");
      ses.key.dcid = cid_field(r, "dcid");
      ses.direction = direction_field(r);
      ses.version = number<uint32_t>("version", field(r, "version"));
      ses.start_time = number<double>("start_time", field(r, "start_time"));
      ses.src_port = number<uint16_t>("src_port", field(r, "src_port"));
      ses.dst_port = number<uint16_t>("dst_port", field(r, "dst_port"));
      const auto& timeline = field(r, "timeline");
      if (!timeline.empty()) {
        for (auto entry : split(timeline, ';')) {
          auto parts = split(entry, '/');
          if (parts.size() != 4) bad_field("timeline", std::string(entry));
          telescope::TimelineEntry e;
          e.offset = number<double>("offset", std::string(parts[0]));
          e.type = type_of(std::string(parts[1]));
          e.datagram_length = number<uint32_t>("length", std::string(parts[2]));
          e.coalesced = parts[3] == "1";
          ses.timeline.push_back(e);
        }
      }
      out.push_back(std::move(s));
    } catch (const Error& e) {
      fail(Errc::MalformedRecord, path.string() + " row " + std::to_string(row) + ": " + e.what());
    }
  }
  return out;
}

Table datagram_table(const std::vector<telescope::DatagramSummary>& datagrams) {
  Table t({"operator", "timestamp", "src_ip", "dst_ip", "direction", "length", "types"});
  for (const auto& d : datagrams) {
    std::string types;
    for (auto ty : d.types) types += (types.empty() ? "" : ",") + std::string(wire::packet_type_name(ty));
    t.add({d.operator_label, format_double(d.timestamp), d.src_ip.to_string(), d.dst_ip.to_string(),
           std::string(wire::direction_name(d.direction)), d.length, types});
  }
  return t;
}

std::vector<telescope::DatagramSummary> read_datagrams(const std::filesystem::path& path) {
  std::vector<telescope::DatagramSummary> out;
  size_t row = 0;
  for (const auto& r : read_table(path)) {
    ++row;
    try {
      telescope::DatagramSummary d;
      d.operator_label = field(r, "operator");
      d.timestamp = number<double>("timestamp", field(r, "timestamp"));
      d.src_ip = ip_field(r, "src_ip");
      d.dst_ip = ip_field(r, "dst_ip");
      d.direction = direction_field(r);
      d.length = number<uint32_t>("length", field(r, "length"));
      const auto& types = field(r, "types");
      if (!types.empty())
        for (auto t : split(types, ',')) d.types.push_back(type_of(std::string(t)));
      out.push_back(std::move(d));
    } catch (const Error& e) {
      fail(Errc::MalformedRecord, path.string() + " row " + std::to_string(row) + ": " + e.what());
    }
  }
  return out;
}

Table pair_table(const std::vector<std::pair<wire::ConnectionId, wire::ConnectionId>>& pairs) {
  Table t({"client_scid", "client_dcid"});
  for (const auto& [scid, dcid] : pairs) t.add({scid.to_hex(), dcid.to_hex()});
  return t;
}

fingerprint::ClientDcidPairs read_pairs(const std::filesystem::path& path) {
  fingerprint::ClientDcidPairs out;
  for (const auto& r : read_table(path)) out[cid_field(r, "client_scid")] = cid_field(r, "client_dcid");
  return out;
}

}  // namespace quicscatter::cli
