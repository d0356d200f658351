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
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "quicscatter/common/ip.hpp"
#include "quicscatter/sim/profile.hpp"
#include "quicscatter/wire/connection_id.hpp"
#include "quicscatter/wire/packet.hpp"

namespace quicscatter::sim {

inline constexpr double kDefaultStateLifetime = 240.0;
inline constexpr uint8_t kUdpProtocol = 17;

struct FiveTuple {
  Ipv4Address src_ip;
  Ipv4Address dst_ip;
  uint16_t src_port = 0;
  uint16_t dst_port = 0;
  uint8_t protocol = kUdpProtocol;

  bool operator==(const FiveTuple&) const = default;
  uint64_t hash() const;
};

enum class ConnectionState { Established, Closed };

struct Connection {
  wire::ConnectionId server_cid;
  wire::ConnectionId client_scid;
  wire::ConnectionId client_dcid;
  FiveTuple client_tuple;  // as sent by the client
  double created = 0.0;
  ConnectionState state = ConnectionState::Established;
  bool acked = false;
  int planned_resends = 0;
};

class L7LBInstance {
 public:
  L7LBInstance(uint32_t host_id, uint32_t workers, double state_lifetime);

  uint32_t host_id() const { return host_id_; }
  uint32_t workers() const { return workers_; }
  double state_lifetime() const { return state_lifetime_; }

  // Entries stay live for state_lifetime after creation, closed or not.
  Connection* find_live(const wire::ConnectionId& server_cid, double now);
  Connection& open(Connection connection);
  void close(const wire::ConnectionId& server_cid, double now);
  size_t table_size() const { return table_.size(); }

 private:
  void sweep(double now);

  uint32_t host_id_;
  uint32_t workers_;
  double state_lifetime_;
  size_t sweep_at_ = 4096;
  std::unordered_map<wire::ConnectionId, Connection> table_;
};

struct FrontendCluster {
  std::string name;
  std::vector<Ipv4Address> vips;
  std::vector<L7LBInstance> l7lbs;
  RoutingMode routing_mode = RoutingMode::FiveTuple;
  StackProfile profile;

  bool is_vip(Ipv4Address ip) const;
  std::optional<size_t> instance_for_host(uint32_t host_id) const;

  // Server CID -> instance index, consulted by CID-aware routing.
  std::unordered_map<wire::ConnectionId, size_t> cid_directory;
  std::unordered_map<uint32_t, size_t> host_index;
};

struct ClusterConfig {
  std::string name;
  std::vector<Ipv4Address> vips;
  size_t l7lb_count = 1;
  uint32_t host_id_base = 1;
  std::vector<uint32_t> host_ids;  // overrides host_id_base when non-empty
  uint32_t workers = 16;
  RoutingMode routing_mode = RoutingMode::FiveTuple;
  double state_lifetime = kDefaultStateLifetime;
};

// Throws Error(InvalidConfig) on empty VIP/L7LB sets, duplicate host IDs, or
// host IDs wider than the profile's SCID scheme allows.
FrontendCluster build_cluster(const ClusterConfig& config, const StackProfile& profile);

// Index of the L7LB instance that receives a packet. Throws Error(NotAVip).
size_t route(FrontendCluster& cluster, const FiveTuple& tuple, const wire::ConnectionId& dcid, double now);

enum class PacketVerdict { Accept, SilentDiscard, NewConnection };
std::string_view packet_verdict_name(PacketVerdict verdict);

// What the instance would do with a client packet, given its connection table.
PacketVerdict handle_packet(L7LBInstance& instance, const wire::LongHeader& packet, const FiveTuple& tuple,
                            double now);

}  // namespace quicscatter::sim
