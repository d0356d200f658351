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

#include "quicscatter/fingerprint/statistics.hpp"

#include <algorithm>

namespace quicscatter::fingerprint {

std::string_view role_name(Role role) { return role == Role::Client ? "client" : "server"; }

uint64_t VersionTally::total(Role role) const {
  uint64_t sum = 0;
  for (const auto& [key, n] : counts) {
    if (key.first == role) sum += n;
  }
  return sum;
}

double VersionTally::share(Role role, const std::string& label) const {
  auto t = total(role);
  auto it = counts.find({role, label});
  return t == 0 || it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(t);
}

void VersionTally::merge(const VersionTally& other) {
  for (const auto& [key, n] : other.counts) counts[key] += n;
}

VersionTally version_tally(std::span<const telescope::Session> sessions, const wire::VersionRegistry& registry) {
  VersionTally tally;
  for (const auto& s : sessions) {
    if (s.direction == wire::Direction::NonQuic) continue;
    Role role = s.direction == wire::Direction::Request ? Role::Client : Role::Server;
    ++tally.counts[{role, registry.label(s.version)}];
  }
  return tally;
}

std::string packet_category(std::span<const wire::PacketType> types) {
  std::string out;
  for (size_t i = 0; i < types.size(); ++i) {
    if (i > 0) out += " & ";
    out += wire::packet_type_name(types[i]);
  }
  return out;
}

double PacketTypeStats::percent(const std::string& op, const std::string& category) const {
  auto t = total(op);
  if (t == 0) return 0.0;
  const auto& row = counts.at(op);
  auto it = row.find(category);
  return it == row.end() ? 0.0 : 100.0 * static_cast<double>(it->second) / static_cast<double>(t);
}

uint64_t PacketTypeStats::total(const std::string& op) const {
  auto it = counts.find(op);
  if (it == counts.end()) return 0;
  uint64_t sum = 0;
  for (const auto& [cat, n] : it->second) sum += n;
  return sum;
}

void PacketTypeStats::merge(const PacketTypeStats& other) {
  for (const auto& [op, row] : other.counts) {
    for (const auto& [cat, n] : row) counts[op][cat] += n;
  }
}

PacketTypeStats packet_type_stats(std::span<const telescope::DatagramSummary> datagrams) {
  PacketTypeStats stats;
  for (const auto& d : datagrams) {
    if (d.types.empty()) continue;
    ++stats.counts[d.operator_label][packet_category(d.types)];
  }
  return stats;
}

double coalesced_share(std::span<const telescope::DatagramSummary> datagrams) {
  if (datagrams.empty()) return 0.0;
  auto n = std::count_if(datagrams.begin(), datagrams.end(), [](const auto& d) { return d.coalesced(); });
  return static_cast<double>(n) / static_cast<double>(datagrams.size());
}

std::string length_key_label(const LengthKey& key) {
  std::string out;
  for (size_t i = 0; i < key.types.size(); ++i) {
    if (i > 0) out += ",";
    out += wire::packet_type_name(key.types[i]);
  }
  return out;
}

std::vector<std::pair<LengthKey, uint64_t>> LengthHistogram::top(const std::string& op, size_t k) const {
  std::vector<std::pair<LengthKey, uint64_t>> rows;
  auto it = counts.find(op);
  if (it == counts.end()) return rows;
  rows.assign(it->second.begin(), it->second.end());
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (rows.size() > k) rows.resize(k);
  return rows;
}

void LengthHistogram::merge(const LengthHistogram& other) {
  for (const auto& [op, row] : other.counts) {
    for (const auto& [key, n] : row) counts[op][key] += n;
  }
}

LengthHistogram length_histogram(std::span<const telescope::DatagramSummary> datagrams) {
  LengthHistogram hist;
  for (const auto& d : datagrams) {
    if (d.types.empty()) continue;
    ++hist.counts[d.operator_label][LengthKey{d.types, d.length}];
  }
  return hist;
}

}  // namespace quicscatter::fingerprint
