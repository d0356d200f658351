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

#include "quicscatter/sim/server.hpp"

#include <algorithm>

#include "quicscatter/common/error.hpp"
#include "quicscatter/scid/facebook_codec.hpp"
#include "quicscatter/wire/varint.hpp"

namespace quicscatter::sim {

namespace {

constexpr size_t kMinPayload = 20;

wire::ConnectionId random_cid(Rng& rng, size_t length) {
  std::array<uint8_t, wire::ConnectionId::kMaxLength> buf{};
  rng.fill(std::span(buf.data(), length));
  return wire::ConnectionId(std::span<const uint8_t>(buf.data(), length));
}

}  // namespace

std::vector<uint8_t> padded_packet(const wire::LongHeader& header, size_t target, Rng& rng) {
  size_t fixed = 7 + header.dcid.size() + header.scid.size();
  if (header.type == wire::PacketType::Initial) fixed += wire::varint_size(header.token.size()) + header.token.size();
  size_t payload = kMinPayload;
  for (size_t k : {1, 2, 4}) {
    if (target < fixed + k + kMinPayload) continue;
    size_t p = target - fixed - k;
    if (wire::varint_size(p) == k) {
      payload = p;
      break;
    }
  }
  std::vector<uint8_t> body(payload);
  rng.fill(body);
  return wire::encode_long_header(header, body);
}

Simulator::Simulator(uint64_t seed, double epoch) : rng_(seed), epoch_(epoch) {}

size_t Simulator::add_cluster(FrontendCluster cluster) {
  size_t index = clusters_.size();
  for (auto vip : cluster.vips) {
    if (!vip_owner_.emplace(vip, index).second) fail(Errc::InvalidConfig, "VIP " + vip.to_string() + " in two clusters");
  }
  clusters_.push_back(std::move(cluster));
  return index;
}

std::optional<size_t> Simulator::cluster_for_vip(Ipv4Address vip) const {
  auto it = vip_owner_.find(vip);
  if (it == vip_owner_.end()) return std::nullopt;
  return it->second;
}

Delivery Simulator::deliver(const FiveTuple& tuple, const wire::LongHeader& packet) {
  auto owner = cluster_for_vip(tuple.dst_ip);
  if (!owner) fail(Errc::NotAVip, tuple.dst_ip.to_string() + " is not a simulated VIP");
  Delivery d;
  d.cluster = *owner;
  auto& cluster = clusters_[d.cluster];
  d.instance = route(cluster, tuple, packet.dcid, clock_.now());
  auto& instance = cluster.l7lbs[d.instance];
  d.verdict = handle_packet(instance, packet, tuple, clock_.now());
  if (d.verdict == PacketVerdict::NewConnection) {
    d.server_cid = serve_initial(d.cluster, d.instance, tuple, packet);
  } else if (d.verdict == PacketVerdict::Accept && packet.type != wire::PacketType::Initial) {
    instance.find_live(packet.dcid, clock_.now())->acked = true;
  }
  return d;
}

void Simulator::close(size_t cluster, size_t instance, const wire::ConnectionId& server_cid) {
  clusters_.at(cluster).l7lbs.at(instance).close(server_cid, clock_.now());
}

void Simulator::emit(const wire::Datagram& datagram) {
  if (sink_) sink_(datagram);
}

wire::ConnectionId Simulator::server_cid_for(const FrontendCluster& cluster, const L7LBInstance& instance,
                                             const wire::LongHeader& initial) {
  const auto& profile = cluster.profile;
  switch (profile.scid_scheme) {
    case ScidSchemeKind::FacebookV1:
    case ScidSchemeKind::FacebookV2: {
      scid::FacebookScidFields f;
      f.scid_version = profile.scid_scheme == ScidSchemeKind::FacebookV2 ? 2 : 1;
      f.host_id = instance.host_id();
      f.worker_id = static_cast<uint8_t>(rng_.below(instance.workers()));
      return scid::encode_facebook_scid(f, rng_.next());
    }
    case ScidSchemeKind::CloudflareFixed: {
      auto cid = random_cid(rng_, 20);
      std::array<uint8_t, 20> buf{};
      std::copy(cid.bytes().begin(), cid.bytes().end(), buf.begin());
      buf[0] = 0x01;
      return wire::ConnectionId(buf);
    }
    case ScidSchemeKind::EchoClientDcid: {
      std::array<uint8_t, 8> buf{};
      size_t n = std::min<size_t>(8, initial.dcid.size());
      std::copy_n(initial.dcid.bytes().begin(), n, buf.begin());
      if (n < 8) rng_.fill(std::span(buf).subspan(n));
      return wire::ConnectionId(buf);
    }
    case ScidSchemeKind::UniformRandom:
      return random_cid(rng_, profile.scid_length);
  }
  return {};
}

wire::ConnectionId Simulator::serve_initial(size_t ci, size_t ii, const FiveTuple& tuple,
                                            const wire::LongHeader& initial) {
  auto& cluster = clusters_[ci];
  auto& instance = cluster.l7lbs[ii];
  Connection c;
  c.server_cid = server_cid_for(cluster, instance, initial);
  c.client_scid = initial.scid;
  c.client_dcid = initial.dcid;
  c.client_tuple = tuple;
  c.created = clock_.now();
  c.planned_resends = static_cast<int>(
      rng_.between(cluster.profile.min_retransmissions, cluster.profile.max_retransmissions));
  auto cid = c.server_cid;
  instance.open(std::move(c));
  if (cluster.routing_mode == RoutingMode::CidAware) cluster.cid_directory[cid] = ii;
  emit_round(ci, ii, cid, 0);
  return cid;
}

void Simulator::schedule_round(size_t ci, size_t ii, const wire::ConnectionId& server_cid, int round, double at) {
  clock_.schedule_at(at, [this, ci, ii, server_cid, round] { emit_round(ci, ii, server_cid, round); });
}

void Simulator::emit_round(size_t ci, size_t ii, const wire::ConnectionId& server_cid, int round) {
  auto& cluster = clusters_[ci];
  Connection* c = cluster.l7lbs[ii].find_live(server_cid, clock_.now());
  if (!c || c->acked || c->state != ConnectionState::Established) return;
  // A newer connection may have reused the CID (echo scheme); its own schedule owns it.
  if (round > 0 && c->created + cluster.profile.resend_offset(round) != clock_.now()) return;

  const auto& profile = cluster.profile;
  wire::LongHeader h;
  h.version = profile.version;
  h.dcid = c->client_scid;
  h.scid = c->server_cid;

  wire::Datagram d;
  d.timestamp = epoch_ + clock_.now();
  d.src_ip = c->client_tuple.dst_ip;
  d.dst_ip = c->client_tuple.src_ip;
  d.src_port = c->client_tuple.dst_port;
  d.dst_port = c->client_tuple.src_port;

  if (rng_.chance(profile.coalesce_fraction)) {
    h.type = wire::PacketType::Initial;
    size_t initial_len = 7 + h.dcid.size() + h.scid.size() + 1 + 2 + profile.padding.coalesced_initial_payload;
    d.payload = padded_packet(h, initial_len, rng_);
    h.type = wire::PacketType::Handshake;
    size_t rest = profile.padding.coalesced > d.payload.size() ? profile.padding.coalesced - d.payload.size() : 0;
    auto hs = padded_packet(h, rest, rng_);
    d.payload.insert(d.payload.end(), hs.begin(), hs.end());
    emit(d);
  } else {
    h.type = wire::PacketType::Initial;
    d.payload = padded_packet(h, profile.padding.initial, rng_);
    emit(d);
    h.type = wire::PacketType::Handshake;
    d.payload = padded_packet(h, profile.padding.handshake, rng_);
    emit(d);
  }
  if (round < c->planned_resends) {
    schedule_round(ci, ii, server_cid, round + 1, c->created + profile.resend_offset(round + 1));
  }
}

void schedule_spoofed_session(Simulator& sim, size_t cluster, Ipv4Address source, double start,
                              const FloodOptions& options, FloodResult& result) {
  auto& rng = sim.rng();
  const auto& vips = sim.cluster(cluster).vips;
  FiveTuple tuple;
  tuple.src_ip = source;
  tuple.dst_ip = vips[rng.below(vips.size())];
  tuple.src_port = static_cast<uint16_t>(rng.between(1024, 65535));
  tuple.dst_port = wire::kQuicPort;

  wire::LongHeader initial;
  initial.type = wire::PacketType::Initial;
  initial.version = sim.cluster(cluster).profile.version;
  initial.dcid = random_cid(rng, options.client_dcid_length);
  initial.scid = random_cid(rng, 8);
  result.client_ids.emplace_back(initial.scid, initial.dcid);
  ++result.sessions;

  bool acks = rng.chance(options.ack_probability);
  double ack_delay = options.ack_delay;
  sim.clock().schedule_at(start, [&sim, tuple, initial, acks, ack_delay] {
    auto d = sim.deliver(tuple, initial);
    if (!acks || !d.server_cid) return;
    wire::LongHeader ack;
    ack.type = wire::PacketType::Handshake;
    ack.version = initial.version;
    ack.dcid = *d.server_cid;
    ack.scid = initial.scid;
    sim.clock().schedule_in(ack_delay, [&sim, tuple, ack] { sim.deliver(tuple, ack); });
  });
}

FloodResult simulate_flood(const FrontendCluster& cluster, std::span<const Ipv4Address> spoofed_sources,
                           double duration, uint64_t seed, const FloodOptions& options) {
  if (!(duration > 0)) fail(Errc::InvalidConfig, "flood duration must be positive");
  Simulator sim(seed, options.epoch);
  size_t ci = sim.add_cluster(cluster);
  FloodResult result;
  sim.set_sink([&result](const wire::Datagram& d) { result.datagrams.push_back(d); });
  for (auto source : spoofed_sources) {
    for (size_t s = 0; s < options.sessions_per_source; ++s) {
      double start = options.attack_window > 0 ? sim.rng().unit() * options.attack_window : 0.0;
      if (start < duration) schedule_spoofed_session(sim, ci, source, start, options, result);
    }
  }
  sim.clock().run_before(duration);
  return result;
}

}  // namespace quicscatter::sim
