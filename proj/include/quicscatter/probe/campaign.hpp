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
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "quicscatter/common/ip.hpp"
#include "quicscatter/probe/transport.hpp"

namespace quicscatter::probe {

enum class PortStrategy { DecreasingFromMax, RandomSeeded };
std::string_view port_strategy_name(PortStrategy s);
std::optional<PortStrategy> port_strategy_from_name(std::string_view name);

// Server CID -> host ID, nullopt when the CID carries none.
using HostIdCodec = std::function<std::optional<uint32_t>(const wire::ConnectionId&)>;
HostIdCodec facebook_host_codec();

struct HarvestOptions {
  PortStrategy port_strategy = PortStrategy::DecreasingFromMax;
  uint16_t start_port = 65535;
  uint16_t min_port = 1024;
  double inter_probe_gap = 0.0;
  uint64_t seed = 1;
  double max_failure_rate = 0.5;
  size_t failure_grace = 20;  // attempts before the failure rate is judged
};

struct HostIdHarvest {
  Ipv4Address vip;
  std::vector<std::pair<size_t, uint32_t>> observations;  // (handshake index, host ID)
  std::set<uint32_t> unique_ids;
  size_t attempts = 0;
  size_t failures = 0;
};

// Throws Error(TransportUnavailable) or Error(HarvestAborted) once more than
// max_failure_rate of the attempts so far failed.
HostIdHarvest harvest_host_ids(Ipv4Address vip, size_t n, Transport& transport, const HostIdCodec& codec,
                               const HarvestOptions& options = {});

// (handshakes so far, fraction of the final unique set), one point per
// observation. Throws Error(EmptyHarvest).
std::vector<std::pair<size_t, double>> discovery_curve(const HostIdHarvest& harvest);

inline constexpr double kDefaultJaccardThreshold = 0.5;

struct ClusterReport {
  std::vector<Ipv4Address> vips;
  std::vector<std::vector<double>> jaccard;      // indexed like vips
  std::vector<std::vector<size_t>> clusters;     // indices into vips
};

double jaccard(const std::set<uint32_t>& a, const std::set<uint32_t>& b);

// Connected components of the graph with edges where J >= threshold.
ClusterReport cluster_vips(std::span<const HostIdHarvest> harvests, double threshold = kDefaultJaccardThreshold);

enum class LbType { CidAware, FiveTuple, Inconclusive };
std::string_view lb_type_name(LbType t);

struct LbTypeVerdict {
  LbType type = LbType::Inconclusive;
  double fail_window = 0.0;  // CidAware only
  std::optional<uint32_t> held_host_id;
  std::optional<uint32_t> follow_up_host_id;
  size_t follow_ups = 0;
};

struct DetectOptions {
  double probe_interval = 1.0;
  double max_wait = 600.0;
  // Shorter failure runs are read as 5-tuple hash collisions with the held
  // connection's instance, not as CID-aware routing.
  double min_fail_window = 3.0;
  uint16_t start_port = 65535;
  uint64_t seed = 1;
};

// Throws Error(TransportUnavailable) when the initial handshake fails and
// Error(Unsupported) when the transport cannot reuse a server CID.
LbTypeVerdict detect_lb_type(Ipv4Address vip, Transport& transport, const HostIdCodec& codec,
                             const DetectOptions& options = {});

struct ProbeCampaign {
  std::vector<Ipv4Address> targets;
  size_t handshakes_per_vip = 20000;
  HarvestOptions harvest;
  double jaccard_threshold = kDefaultJaccardThreshold;
  bool detect = false;
  DetectOptions detection;
};

// JSON: {"targets": [...] | {"base", "count"}, "handshakes_per_vip", "port_strategy",
// "start_port", "inter_probe_gap", "seed", "jaccard_threshold", "detect_lb_type",
// "probe_interval", "max_wait"}. Throws Error(InvalidConfig).
ProbeCampaign parse_campaign(const std::string& json_text);
ProbeCampaign load_campaign(const std::filesystem::path& path);

}  // namespace quicscatter::probe
