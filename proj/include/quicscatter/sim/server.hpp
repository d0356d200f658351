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
#include <functional>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "quicscatter/common/rng.hpp"
#include "quicscatter/sim/clock.hpp"
#include "quicscatter/sim/cluster.hpp"
#include "quicscatter/wire/datagram.hpp"

namespace quicscatter::sim {

// 2022-01-01T00:00:00Z; virtual time 0 maps here in generated captures.
inline constexpr double kDefaultEpoch = 1640995200.0;

using DatagramSink = std::function<void(const wire::Datagram&)>;

struct Delivery {
  PacketVerdict verdict = PacketVerdict::SilentDiscard;
  size_t cluster = 0;
  size_t instance = 0;
  std::optional<wire::ConnectionId> server_cid;  // set for NewConnection
};

// A set of frontend clusters sharing one virtual clock. Server datagrams go
// to the sink with timestamps epoch + clock time.
class Simulator {
 public:
  explicit Simulator(uint64_t seed, double epoch = kDefaultEpoch);

  size_t add_cluster(FrontendCluster cluster);
  FrontendCluster& cluster(size_t index) { return clusters_.at(index); }
  size_t cluster_count() const { return clusters_.size(); }
  std::optional<size_t> cluster_for_vip(Ipv4Address vip) const;

  VirtualClock& clock() { return clock_; }
  const VirtualClock& clock() const { return clock_; }
  Rng& rng() { return rng_; }
  double epoch() const { return epoch_; }
  void set_sink(DatagramSink sink) { sink_ = std::move(sink); }

  // A client packet arriving at clock().now(). An accepted non-Initial
  // acknowledges the connection and stops its resends. Throws Error(NotAVip).
  Delivery deliver(const FiveTuple& tuple, const wire::LongHeader& packet);

  // Client closes the connection; state lingers until it expires.
  void close(size_t cluster, size_t instance, const wire::ConnectionId& server_cid);

  // Passes a datagram straight to the sink (background traffic).
  void emit(const wire::Datagram& datagram);

 private:
  wire::ConnectionId serve_initial(size_t ci, size_t ii, const FiveTuple& tuple, const wire::LongHeader& initial);
  wire::ConnectionId server_cid_for(const FrontendCluster& cluster, const L7LBInstance& instance,
                                    const wire::LongHeader& initial);
  void emit_round(size_t ci, size_t ii, const wire::ConnectionId& server_cid, int round);
  void schedule_round(size_t ci, size_t ii, const wire::ConnectionId& server_cid, int round, double at);

  Rng rng_;
  double epoch_;
  VirtualClock clock_;
  DatagramSink sink_;
  std::vector<FrontendCluster> clusters_;
  std::unordered_map<Ipv4Address, size_t> vip_owner_;
};

// Builds a server packet of type `type` whose encoding is `target` octets long
// (or as short as the header allows).
std::vector<uint8_t> padded_packet(const wire::LongHeader& header, size_t target, Rng& rng);

struct FloodOptions {
  size_t sessions_per_source = 1;
  double attack_window = 0.0;  // session start times are uniform in [0, attack_window)
  double ack_probability = 0.0;
  double ack_delay = 0.05;
  double epoch = kDefaultEpoch;
  size_t client_dcid_length = 8;
};

struct FloodResult {
  std::vector<wire::Datagram> datagrams;
  // (client SCID, client DCID) of every spoofed Initial; the client SCID is
  // the DCID of the server's responses.
  std::vector<std::pair<wire::ConnectionId, wire::ConnectionId>> client_ids;
  size_t sessions = 0;
};

// Spoofed client Initials from `spoofed_sources` to random VIPs; returns the
// server datagrams sent back to those sources before `duration`.
FloodResult simulate_flood(const FrontendCluster& cluster, std::span<const Ipv4Address> spoofed_sources,
                           double duration, uint64_t seed, const FloodOptions& options = {});

// Schedules one spoofed session on `sim`; shared by the flood and scenario drivers.
void schedule_spoofed_session(Simulator& sim, size_t cluster, Ipv4Address source, double start,
                              const FloodOptions& options, FloodResult& result);

}  // namespace quicscatter::sim
