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

#include "quicscatter/sim/cluster.hpp"

#include <unordered_set>

#include "quicscatter/common/error.hpp"
#include "quicscatter/common/rng.hpp"
#include "quicscatter/scid/facebook_codec.hpp"

namespace quicscatter::sim {

uint64_t FiveTuple::hash() const {
  uint64_t h = Rng::mix((uint64_t{src_ip.value()} << 32) | dst_ip.value());
  h = Rng::mix(h ^ ((uint64_t{src_port} << 24) | (uint64_t{dst_port} << 8) | protocol));
  return h;
}

L7LBInstance::L7LBInstance(uint32_t host_id, uint32_t workers, double state_lifetime)
    : host_id_(host_id), workers_(workers), state_lifetime_(state_lifetime) {}

Connection* L7LBInstance::find_live(const wire::ConnectionId& server_cid, double now) {
  auto it = table_.find(server_cid);
  if (it == table_.end()) return nullptr;
  if (now >= it->second.created + state_lifetime_) {
    table_.erase(it);
    return nullptr;
  }
  return &it->second;
}

Connection& L7LBInstance::open(Connection connection) {
  if (table_.size() >= sweep_at_) sweep(connection.created);
  auto key = connection.server_cid;
  auto& slot = table_[key];
  slot = std::move(connection);
  return slot;
}

void L7LBInstance::close(const wire::ConnectionId& server_cid, double now) {
  if (auto* c = find_live(server_cid, now)) c->state = ConnectionState::Closed;
}

void L7LBInstance::sweep(double now) {
  std::erase_if(table_, [&](const auto& kv) { return now >= kv.second.created + state_lifetime_; });
  sweep_at_ = std::max<size_t>(4096, table_.size() * 2);
}

bool FrontendCluster::is_vip(Ipv4Address ip) const {
  for (auto v : vips)
    if (v == ip) return true;
  return false;
}

std::optional<size_t> FrontendCluster::instance_for_host(uint32_t host_id) const {
  auto it = host_index.find(host_id);
  if (it == host_index.end()) return std::nullopt;
  return it->second;
}

FrontendCluster build_cluster(const ClusterConfig& config, const StackProfile& profile) {
  auto bad = [&](const std::string& what) { fail(Errc::InvalidConfig, "cluster " + config.name + ": " + what); };
  profile.validate();
  if (config.vips.empty()) bad("no VIPs");
  std::vector<uint32_t> ids = config.host_ids;
  if (ids.empty()) {
    if (config.l7lb_count == 0) bad("no L7LB instances");
    for (size_t i = 0; i < config.l7lb_count; ++i) ids.push_back(config.host_id_base + static_cast<uint32_t>(i));
  } else if (config.l7lb_count != 0 && config.l7lb_count != ids.size()) {
    bad("l7lb count disagrees with host ID list");
  }
  if (config.workers == 0 || config.workers > 256) bad("workers must be in [1, 256]");
  if (!(config.state_lifetime > 0)) bad("state_lifetime must be positive");

  int width = 32;
  if (profile.scid_scheme == ScidSchemeKind::FacebookV1) width = scid::facebook_host_id_bits(1);
  if (profile.scid_scheme == ScidSchemeKind::FacebookV2) width = scid::facebook_host_id_bits(2);

  FrontendCluster cluster;
  cluster.name = config.name;
  cluster.vips = config.vips;
  cluster.routing_mode = config.routing_mode;
  cluster.profile = profile;
  std::unordered_set<Ipv4Address> seen_vips;
  for (auto v : config.vips)
    if (!seen_vips.insert(v).second) bad("duplicate VIP " + v.to_string());
  for (uint32_t id : ids) {
    if (width < 32 && (id >> width) != 0) bad("host ID " + std::to_string(id) + " exceeds scheme width");
    if (!cluster.host_index.emplace(id, cluster.l7lbs.size()).second)
      bad("duplicate host ID " + std::to_string(id));
    cluster.l7lbs.emplace_back(id, config.workers, config.state_lifetime);
  }
  return cluster;
}

namespace {

// Highest-random-weight choice over host IDs.
size_t rendezvous(const FrontendCluster& cluster, uint64_t key) {
  size_t best = 0;
  uint64_t best_weight = 0;
  for (size_t i = 0; i < cluster.l7lbs.size(); ++i) {
    uint64_t w = Rng::mix(key ^ (uint64_t{cluster.l7lbs[i].host_id()} * 0x9e3779b97f4a7c15ULL));
    if (i == 0 || w > best_weight) {
      best = i;
      best_weight = w;
    }
  }
  return best;
}

bool facebook_scheme(ScidSchemeKind k) { return k == ScidSchemeKind::FacebookV1 || k == ScidSchemeKind::FacebookV2; }

}  // namespace

size_t route(FrontendCluster& cluster, const FiveTuple& tuple, const wire::ConnectionId& dcid, double now) {
  if (!cluster.is_vip(tuple.dst_ip)) fail(Errc::NotAVip, tuple.dst_ip.to_string() + " is not a VIP of " + cluster.name);
  if (cluster.routing_mode == RoutingMode::CidAware) {
    if (facebook_scheme(cluster.profile.scid_scheme) && dcid.size() == scid::kFacebookScidLength) {
      try {
        auto fields = scid::decode_facebook_scid(dcid);
        if (auto idx = cluster.instance_for_host(fields.host_id)) return *idx;
      } catch (const Error&) {
      }
    }
    auto it = cluster.cid_directory.find(dcid);
    if (it != cluster.cid_directory.end()) {
      if (cluster.l7lbs[it->second].find_live(dcid, now)) return it->second;
      cluster.cid_directory.erase(it);
    }
  }
  return rendezvous(cluster, tuple.hash());
}

std::string_view packet_verdict_name(PacketVerdict verdict) {
  switch (verdict) {
    case PacketVerdict::Accept: return "Accept";
    case PacketVerdict::SilentDiscard: return "SilentDiscard";
    case PacketVerdict::NewConnection: return "NewConnection";
  }
  return "?";
}

PacketVerdict handle_packet(L7LBInstance& instance, const wire::LongHeader& packet, const FiveTuple& tuple,
                            double now) {
  Connection* c = instance.find_live(packet.dcid, now);
  if (packet.type == wire::PacketType::Initial) {
    if (!c) return PacketVerdict::NewConnection;
    // Only a retransmission of the original client Initial is consistent.
    bool same = c->state == ConnectionState::Established && c->client_tuple == tuple &&
                c->client_scid == packet.scid;
    return same ? PacketVerdict::Accept : PacketVerdict::SilentDiscard;
  }
  if (!c || c->state != ConnectionState::Established || !(c->client_tuple == tuple)) return PacketVerdict::SilentDiscard;
  return PacketVerdict::Accept;
}

}  // namespace quicscatter::sim
