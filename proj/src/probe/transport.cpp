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

#include "quicscatter/probe/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include "quicscatter/common/error.hpp"
#include "quicscatter/wire/packet.hpp"

namespace quicscatter::probe {

SimulatorTransport::SimulatorTransport(sim::Simulator& sim, Ipv4Address client_ip) : sim_(sim), client_ip_(client_ip) {}

sim::FiveTuple SimulatorTransport::tuple_for(const HandshakeRequest& request) const {
  return sim::FiveTuple{client_ip_, request.vip, request.src_port, wire::kQuicPort, sim::kUdpProtocol};
}

HandshakeResult SimulatorTransport::handshake(const HandshakeRequest& request) {
  auto cluster = sim_.cluster_for_vip(request.vip);
  if (!cluster) fail(Errc::TransportUnavailable, request.vip.to_string() + " does not answer");
  auto tuple = tuple_for(request);
  wire::LongHeader initial;
  initial.type = wire::PacketType::Initial;
  initial.version = sim_.cluster(*cluster).profile.version;
  initial.dcid = request.dcid;
  initial.scid = request.scid;
  auto d = sim_.deliver(tuple, initial);
  if (d.verdict != sim::PacketVerdict::NewConnection) return {};

  // Finish the handshake so the server stops resending.
  wire::LongHeader fin = initial;
  fin.type = wire::PacketType::Handshake;
  fin.dcid = *d.server_cid;
  sim_.deliver(tuple, fin);
  open_[*d.server_cid] = Open{d.cluster, d.instance};
  return HandshakeResult{true, d.server_cid};
}

void SimulatorTransport::close(const HandshakeRequest&, const wire::ConnectionId& server_cid) {
  auto it = open_.find(server_cid);
  if (it == open_.end()) return;
  sim_.close(it->second.cluster, it->second.instance, server_cid);
  open_.erase(it);
}

void SimulatorTransport::wait(double seconds) { sim_.clock().run_until(sim_.clock().now() + seconds); }

double SimulatorTransport::now() const { return sim_.clock().now(); }

UdpTransport::UdpTransport(std::vector<uint8_t> client_initial, UdpTransportOptions options)
    : template_(std::move(client_initial)), options_(options), start_(std::chrono::steady_clock::now()) {
  auto scan = wire::scan_datagram(template_);
  if (scan.packets.empty() || scan.packets[0].type != wire::PacketType::Initial)
    fail(Errc::InvalidConfig, "client Initial template does not start with an Initial packet");
  template_scid_ = scan.packets[0].scid;
}

double UdpTransport::now() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

void UdpTransport::wait(double seconds) {
  if (seconds > 0) std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

HandshakeResult UdpTransport::handshake(const HandshakeRequest& request) {
  if (last_send_) {
    auto next = *last_send_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                  std::chrono::duration<double>(options_.min_send_gap));
    std::this_thread::sleep_until(next);
  }
  int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd < 0) fail(Errc::TransportUnavailable, std::string("socket: ") + std::strerror(errno));
  struct Closer {
    int fd;
    ~Closer() { ::close(fd); }
  } closer{fd};

  sockaddr_in local{};
  local.sin_family = AF_INET;
  local.sin_port = htons(request.src_port);
  local.sin_addr.s_addr = htonl(INADDR_ANY);
  // A busy local port counts as a failed attempt, not an unreachable target.
  if (::bind(fd, reinterpret_cast<sockaddr*>(&local), sizeof local) != 0) return {};

  sockaddr_in remote{};
  remote.sin_family = AF_INET;
  remote.sin_port = htons(options_.server_port);
  remote.sin_addr.s_addr = htonl(request.vip.value());
  last_send_ = std::chrono::steady_clock::now();
  if (::sendto(fd, template_.data(), template_.size(), 0, reinterpret_cast<sockaddr*>(&remote), sizeof remote) < 0) {
    fail(Errc::TransportUnavailable, std::string("sendto: ") + std::strerror(errno));
  }

  auto deadline = *last_send_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                    std::chrono::duration<double>(options_.timeout));
  std::vector<uint8_t> buf(65535);
  for (;;) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return {};
    pollfd p{fd, POLLIN, 0};
    int ready = ::poll(&p, 1, static_cast<int>(left.count()));
    if (ready <= 0) return {};
    sockaddr_in from{};
    socklen_t len = sizeof from;
    auto n = ::recvfrom(fd, buf.data(), buf.size(), 0, reinterpret_cast<sockaddr*>(&from), &len);
    if (n <= 0 || from.sin_addr.s_addr != remote.sin_addr.s_addr) continue;
    auto scan = wire::scan_datagram(std::span<const uint8_t>(buf.data(), static_cast<size_t>(n)));
    for (const auto& pkt : scan.packets) {
      if (pkt.type == wire::PacketType::Initial && pkt.dcid == template_scid_) return HandshakeResult{true, pkt.scid};
    }
  }
}

}  // namespace quicscatter::probe
