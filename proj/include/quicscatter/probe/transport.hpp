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

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include "quicscatter/common/ip.hpp"
#include "quicscatter/sim/server.hpp"
#include "quicscatter/wire/connection_id.hpp"

namespace quicscatter::probe {

struct HandshakeRequest {
  Ipv4Address vip;
  uint16_t src_port = 0;
  wire::ConnectionId dcid;  // client-chosen, or a server CID to reuse
  wire::ConnectionId scid;
};

struct HandshakeResult {
  bool completed = false;
  std::optional<wire::ConnectionId> server_cid;
};

// Where probes go. Handshake attempts return once they complete or time out.
class Transport {
 public:
  virtual ~Transport() = default;

  // Throws Error(TransportUnavailable) when the VIP cannot be reached at all.
  virtual HandshakeResult handshake(const HandshakeRequest& request) = 0;
  // Ends a completed connection; servers may keep its state around.
  virtual void close(const HandshakeRequest& request, const wire::ConnectionId& server_cid) = 0;
  virtual void wait(double seconds) = 0;
  virtual double now() const = 0;
  // Whether requests may carry arbitrary DCIDs (needed to reuse a server CID).
  virtual bool chooses_client_ids() const { return true; }
};

// In-process loopback into a Simulator. Time is the simulator's virtual clock.
class SimulatorTransport : public Transport {
 public:
  explicit SimulatorTransport(sim::Simulator& sim, Ipv4Address client_ip = Ipv4Address::from_string("192.0.2.10"));

  HandshakeResult handshake(const HandshakeRequest& request) override;
  void close(const HandshakeRequest& request, const wire::ConnectionId& server_cid) override;
  void wait(double seconds) override;
  double now() const override;

 private:
  sim::FiveTuple tuple_for(const HandshakeRequest& request) const;

  sim::Simulator& sim_;
  Ipv4Address client_ip_;
  struct Open {
    size_t cluster;
    size_t instance;
  };
  std::unordered_map<wire::ConnectionId, Open> open_;
};

struct UdpTransportOptions {
  double timeout = 1.0;        // seconds to wait for a server Initial
  double min_send_gap = 0.1;   // rate limit between datagrams
  uint16_t server_port = 443;
};

// Real network probing. QUIC Initials are encrypted with keys derived from the
// client DCID, so this transport replays a captured client Initial verbatim and
// only varies the source port. Requests' CIDs are ignored.
class UdpTransport : public Transport {
 public:
  UdpTransport(std::vector<uint8_t> client_initial, UdpTransportOptions options = {});

  HandshakeResult handshake(const HandshakeRequest& request) override;
  void close(const HandshakeRequest&, const wire::ConnectionId&) override {}
  void wait(double seconds) override;
  double now() const override;
  bool chooses_client_ids() const override { return false; }

 private:
  std::vector<uint8_t> template_;
  wire::ConnectionId template_scid_;
  UdpTransportOptions options_;
  std::chrono::steady_clock::time_point start_;
  std::optional<std::chrono::steady_clock::time_point> last_send_;
};

}  // namespace quicscatter::probe
