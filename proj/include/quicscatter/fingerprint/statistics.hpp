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
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "quicscatter/telescope/ingest.hpp"
#include "quicscatter/telescope/summary.hpp"
#include "quicscatter/wire/version_registry.hpp"

namespace quicscatter::fingerprint {

enum class Role { Client, Server };

std::string_view role_name(Role role);

// Sessions per (role, version label); each session counts once.
struct VersionTally {
  std::map<std::pair<Role, std::string>, uint64_t> counts;

  uint64_t total(Role role) const;
  double share(Role role, const std::string& label) const;
  bool empty() const { return counts.empty(); }
  void merge(const VersionTally& other);
};

VersionTally version_tally(std::span<const telescope::Session> sessions, const wire::VersionRegistry& registry);

// "Initial", "Handshake", ... for single-packet datagrams; coalesced
// datagrams get their own "Initial & Handshake" style category.
std::string packet_category(std::span<const wire::PacketType> types);

struct PacketTypeStats {
  std::map<std::string, std::map<std::string, uint64_t>> counts;  // operator -> category -> datagrams

  double percent(const std::string& op, const std::string& category) const;
  uint64_t total(const std::string& op) const;
  void merge(const PacketTypeStats& other);
};

PacketTypeStats packet_type_stats(std::span<const telescope::DatagramSummary> datagrams);

// Share of an operator's datagrams that carry more than one packet.
double coalesced_share(std::span<const telescope::DatagramSummary> datagrams);

struct LengthKey {
  std::vector<wire::PacketType> types;
  uint32_t length = 0;

  auto operator<=>(const LengthKey&) const = default;
};

std::string length_key_label(const LengthKey& key);  // "Initial,Handshake" style

struct LengthHistogram {
  std::map<std::string, std::map<LengthKey, uint64_t>> counts;

  // Most frequent keys first; ties by key order.
  std::vector<std::pair<LengthKey, uint64_t>> top(const std::string& op, size_t k) const;
  void merge(const LengthHistogram& other);
};

LengthHistogram length_histogram(std::span<const telescope::DatagramSummary> datagrams);

}  // namespace quicscatter::fingerprint
