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
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "quicscatter/common/ip.hpp"
#include "quicscatter/sim/server.hpp"
#include "quicscatter/telescope/prefix_table.hpp"

namespace quicscatter::sim {

struct ClusterSpec {
  ClusterConfig cluster;
  std::string profile;       // key into DeploymentConfig::profiles
  telescope::AsInfo origin;  // AS the VIPs are announced from
  std::string truth_label;   // ground-truth operator behind the VIPs
  size_t flood_sessions = 0;
};

// Client Initials that reach the telescope directly (scanners, misconfigured clients).
struct ClientTrafficSpec {
  Ipv4Prefix sources;
  size_t datagrams = 0;
  uint32_t version = 1;
  size_t length = 1200;
};

struct DeploymentConfig {
  uint64_t seed = 1;
  double epoch = kDefaultEpoch;
  double duration = 300.0;
  double attack_window = 60.0;
  double ack_probability = 0.0;
  Ipv4Prefix telescope = Ipv4Prefix::from_string("44.0.0.0/9");
  std::map<std::string, StackProfile> profiles;
  std::vector<ClusterSpec> clusters;
  std::vector<ClientTrafficSpec> client_traffic;
};

// Facebook, Cloudflare and Google stacks plus a generic random-CID server.
std::map<std::string, StackProfile> default_stack_profiles();

// JSON document; profiles named in the file extend or replace the defaults.
// Throws Error(InvalidConfig).
DeploymentConfig parse_deployment(const std::string& json_text);
DeploymentConfig load_deployment(const std::filesystem::path& path);

struct ScenarioOutput {
  FloodResult flood;  // server backscatter and client traffic, in time order
  std::vector<std::pair<Ipv4Prefix, telescope::AsInfo>> prefixes;
  std::vector<std::pair<Ipv4Address, std::string>> truth;
};

// Builds every cluster, floods each from random telescope addresses and adds
// client traffic. Deterministic in (config, seed).
ScenarioOutput run_scenario(const DeploymentConfig& config);

// Instantiates the configured clusters on `sim` without any traffic.
void build_deployment(Simulator& sim, const DeploymentConfig& config);

}  // namespace quicscatter::sim
