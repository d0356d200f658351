#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cmath>
#include <thread>

#include "doctest.h"
#include "quicscatter/probe/campaign.hpp"
#include "quicscatter/scid/facebook_codec.hpp"
#include "quicscatter/sim/scenario.hpp"
#include "support.hpp"

using namespace quicscatter;
using namespace quicscatter::probe;
using wire::ConnectionId;

namespace {

Ipv4Address ip(const char* s) { return Ipv4Address::from_string(s); }

sim::ClusterConfig cluster_config(const char* first_vip, uint32_t vips, size_t l7lbs, uint32_t base,
                                  sim::RoutingMode mode = sim::RoutingMode::FiveTuple) {
  sim::ClusterConfig c;
  for (uint32_t i = 0; i < vips; ++i) c.vips.emplace_back(ip(first_vip).value() + i);
  c.l7lb_count = l7lbs;
  c.host_id_base = base;
  c.routing_mode = mode;
  return c;
}

size_t add(sim::Simulator& s, const sim::ClusterConfig& c, const char* profile = "Facebook") {
  return s.add_cluster(sim::build_cluster(c, sim::default_stack_profiles().at(profile)));
}

// Records requests and answers from a scripted list.
class ScriptedTransport : public Transport {
 public:
  std::vector<HandshakeRequest> requests;
  std::function<HandshakeResult(const HandshakeRequest&)> answer;
  bool ids = true;
  double t = 0;

  HandshakeResult handshake(const HandshakeRequest& r) override {
    requests.push_back(r);
    return answer(r);
  }
  void close(const HandshakeRequest&, const ConnectionId&) override {}
  void wait(double s) override { t += s; }
  double now() const override { return t; }
  bool chooses_client_ids() const override { return ids; }
};

ConnectionId fb_cid(uint32_t host) { return scid::encode_facebook_scid({1, host, 0, 0}, host * 7919u); }

}  // namespace

TEST_CASE("single handshake yields one host ID") {
  sim::Simulator s(1);
  add(s, cluster_config("157.240.0.1", 1, 10, 500));
  SimulatorTransport t(s);
  auto h = harvest_host_ids(ip("157.240.0.1"), 1, t, facebook_host_codec());
  CHECK(h.attempts == 1);
  CHECK(h.observations.size() == 1);
  CHECK(h.unique_ids.size() == 1);
  CHECK(*h.unique_ids.begin() >= 500);
  CHECK(*h.unique_ids.begin() < 510);
}

TEST_CASE("unique host IDs after 1000 handshakes match the occupancy expectation") {
  sim::Simulator s(2);
  add(s, cluster_config("157.240.0.1", 1, 400, 1000));
  SimulatorTransport t(s);
  auto h = harvest_host_ids(ip("157.240.0.1"), 1000, t, facebook_host_codec());
  const double expected = 1.0 - std::pow(1.0 - 1.0 / 400.0, 1000);
  CHECK(expected == doctest::Approx(0.918).epsilon(0.001));
  CHECK(std::abs(static_cast<double>(h.unique_ids.size()) / 400.0 - expected) <= 0.05);
  for (uint32_t id : h.unique_ids) {
    CHECK(id >= 1000);
    CHECK(id < 1400);
  }
}

TEST_CASE("20k handshakes find every instance of a 453-instance cluster") {
  sim::Simulator s(3);
  add(s, cluster_config("157.240.0.1", 22, 453, 2000));
  SimulatorTransport t(s);
  auto h = harvest_host_ids(ip("157.240.0.9"), 20000, t, facebook_host_codec());
  CHECK(h.unique_ids.size() == 453);
  CHECK(h.failures == 0);
  auto curve = discovery_curve(h);
  CHECK(curve.back().second == 1.0);
  CHECK(curve[999].first == 1000);
  CHECK(curve[999].second >= 0.85);
  for (size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].second >= curve[i - 1].second);
}

TEST_CASE("port strategies") {
  ScriptedTransport t;
  t.answer = [](const HandshakeRequest&) { return HandshakeResult{true, fb_cid(1)}; };
  harvest_host_ids(ip("10.0.0.1"), 5, t, facebook_host_codec());
  REQUIRE(t.requests.size() == 5);
  for (size_t i = 0; i < 5; ++i) CHECK(t.requests[i].src_port == 65535 - i);

  ScriptedTransport w;
  w.answer = t.answer;
  HarvestOptions o;
  o.start_port = 1026;
  o.min_port = 1024;
  harvest_host_ids(ip("10.0.0.1"), 5, w, facebook_host_codec(), o);
  std::vector<uint16_t> ports;
  for (auto& r : w.requests) ports.push_back(r.src_port);
  CHECK(ports == std::vector<uint16_t>{1026, 1025, 1024, 1026, 1025});

  ScriptedTransport a, b;
  a.answer = b.answer = t.answer;
  o = {};
  o.port_strategy = PortStrategy::RandomSeeded;
  o.seed = 9;
  o.inter_probe_gap = 0.5;
  harvest_host_ids(ip("10.0.0.1"), 50, a, facebook_host_codec(), o);
  harvest_host_ids(ip("10.0.0.1"), 50, b, facebook_host_codec(), o);
  for (size_t i = 0; i < 50; ++i) {
    CHECK(a.requests[i].src_port == b.requests[i].src_port);
    CHECK(a.requests[i].dcid == b.requests[i].dcid);
    CHECK(a.requests[i].src_port >= 1024);
  }
  CHECK(a.t == doctest::Approx(49 * 0.5));
}

TEST_CASE("harvest failures") {
  sim::Simulator s(4);
  add(s, cluster_config("142.250.0.1", 1, 5, 1), "Google");
  SimulatorTransport t(s);
  // Echoed CIDs carry no Facebook host ID.
  CHECK_ERRC(harvest_host_ids(ip("142.250.0.1"), 100, t, facebook_host_codec()), Errc::HarvestAborted);
  CHECK_ERRC(harvest_host_ids(ip("9.9.9.9"), 10, t, facebook_host_codec()), Errc::TransportUnavailable);
  CHECK_ERRC(harvest_host_ids(ip("142.250.0.1"), 0, t, facebook_host_codec()), Errc::InvalidConfig);

  // Occasional failures are recorded, not fatal.
  ScriptedTransport flaky;
  int k = 0;
  flaky.answer = [&](const HandshakeRequest&) {
    return ++k % 3 == 0 ? HandshakeResult{} : HandshakeResult{true, fb_cid(static_cast<uint32_t>(k))};
  };
  auto h = harvest_host_ids(ip("10.0.0.1"), 30, flaky, facebook_host_codec());
  CHECK(h.failures == 10);
  CHECK(h.observations.size() == 20);
  CHECK(h.observations[0].first == 0);
  CHECK(h.observations[2].first == 3);
}

TEST_CASE("discovery curve shapes") {
  HostIdHarvest linear;
  for (uint32_t i = 0; i < 4; ++i) {
    linear.observations.emplace_back(i, i);
    linear.unique_ids.insert(i);
  }
  auto c = discovery_curve(linear);
  REQUIRE(c.size() == 4);
  for (size_t i = 0; i < 4; ++i) CHECK(c[i].second == doctest::Approx((i + 1) / 4.0));

  sim::Simulator s(5);
  add(s, cluster_config("157.240.0.1", 1, 1, 42));
  SimulatorTransport t(s);
  auto h = harvest_host_ids(ip("157.240.0.1"), 25, t, facebook_host_codec());
  for (auto [n, f] : discovery_curve(h)) CHECK(f == 1.0);

  CHECK_ERRC(discovery_curve(HostIdHarvest{}), Errc::EmptyHarvest);
}

TEST_CASE("Jaccard and clustering") {
  CHECK(jaccard({1, 2, 3}, {2, 3, 4}) == doctest::Approx(0.5));
  CHECK(jaccard({1}, {2}) == 0.0);
  CHECK(jaccard({1, 2}, {1, 2}) == 1.0);

  std::vector<HostIdHarvest> two(2);
  two[0].vip = ip("10.0.0.1");
  two[0].unique_ids = {1, 2};
  two[1].vip = ip("10.0.0.2");
  two[1].unique_ids = {3, 4};
  auto r = cluster_vips(two);
  CHECK(r.clusters.size() == 2);
  CHECK(r.jaccard[0][1] == 0.0);
  CHECK(r.jaccard[1][1] == 1.0);
}

TEST_CASE("VIPs of simulated clusters group by shared host IDs") {
  sim::Simulator s(6);
  const uint32_t clusters = 5, vips = 4;
  for (uint32_t c = 0; c < clusters; ++c) {
    auto cfg = cluster_config("157.240.0.1", vips, 12, 100 * c + 1);
    for (auto& v : cfg.vips) v = Ipv4Address(v.value() + 256 * c);
    add(s, cfg);
  }
  SimulatorTransport t(s);
  std::vector<HostIdHarvest> harvests;
  for (uint32_t c = 0; c < clusters; ++c)
    for (auto vip : s.cluster(c).vips) harvests.push_back(harvest_host_ids(vip, 300, t, facebook_host_codec()));
  auto r = cluster_vips(harvests);
  REQUIRE(r.clusters.size() == clusters);
  std::vector<bool> covered(harvests.size(), false);
  for (const auto& members : r.clusters) {
    CHECK(members.size() == vips);
    for (size_t m : members) {
      CHECK(!covered[m]);
      covered[m] = true;
      CHECK(m / vips == members[0] / vips);
    }
  }
  for (size_t i = 0; i < harvests.size(); ++i) {
    CHECK(r.jaccard[i][i] == 1.0);
    for (size_t j = 0; j < harvests.size(); ++j) {
      CHECK(r.jaccard[i][j] == r.jaccard[j][i]);
      CHECK(r.jaccard[i][j] == (i / vips == j / vips ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("partial harvests of one cluster still cluster together") {
  sim::Simulator s(7);
  add(s, cluster_config("157.240.0.1", 6, 100, 1));
  SimulatorTransport t(s);
  std::vector<HostIdHarvest> hs;
  HarvestOptions o;
  for (auto vip : s.cluster(0).vips) {
    o.seed += 1;
    hs.push_back(harvest_host_ids(vip, 500, t, facebook_host_codec(), o));
  }
  auto r = cluster_vips(hs);
  CHECK(r.clusters.size() == 1);
  for (size_t i = 0; i < hs.size(); ++i)
    for (size_t j = 0; j < hs.size(); ++j) CHECK(r.jaccard[i][j] >= 0.9);
}

TEST_CASE("CID-aware routing shows a fail window of the state lifetime") {
  for (const char* profile : {"Facebook", "Google"}) {
    CAPTURE(profile);
    sim::Simulator s(8);
    add(s, cluster_config("157.240.0.1", 2, 64, 1, sim::RoutingMode::CidAware), profile);
    SimulatorTransport t(s);
    auto v = detect_lb_type(ip("157.240.0.2"), t, facebook_host_codec());
    CHECK(v.type == LbType::CidAware);
    CHECK(std::abs(v.fail_window - sim::kDefaultStateLifetime) <= 1.0);
    CHECK(v.follow_ups >= 239);
  }
}

TEST_CASE("five-tuple routing completes the first follow-up on another instance") {
  sim::Simulator s(9);
  add(s, cluster_config("157.240.0.1", 2, 64, 1));
  SimulatorTransport t(s);
  auto v = detect_lb_type(ip("157.240.0.1"), t, facebook_host_codec());
  CHECK(v.type == LbType::FiveTuple);
  CHECK(v.follow_ups == 1);
  REQUIRE(v.held_host_id);
  REQUIRE(v.follow_up_host_id);
  CHECK(*v.held_host_id != *v.follow_up_host_id);
}

TEST_CASE("detection verdicts are deterministic and never cross modes") {
  for (uint64_t seed = 1; seed <= 15; ++seed) {
    for (auto mode : {sim::RoutingMode::FiveTuple, sim::RoutingMode::CidAware}) {
      auto run = [&] {
        sim::Simulator s(seed);
        add(s, cluster_config("157.240.0.1", 1, 8, 1, mode));
        SimulatorTransport t(s);
        DetectOptions o;
        o.seed = seed;
        return detect_lb_type(ip("157.240.0.1"), t, facebook_host_codec(), o);
      };
      auto a = run();
      auto b = run();
      CHECK(a.type == b.type);
      CHECK(a.fail_window == b.fail_window);
      CHECK(a.follow_ups == b.follow_ups);
      CHECK(a.type == (mode == sim::RoutingMode::CidAware ? LbType::CidAware : LbType::FiveTuple));
    }
  }
}

TEST_CASE("detection edge cases") {
  sim::Simulator s(10);
  add(s, cluster_config("157.240.0.1", 1, 4, 1, sim::RoutingMode::CidAware));
  SimulatorTransport t(s);
  CHECK_ERRC(detect_lb_type(ip("1.1.1.1"), t, facebook_host_codec()), Errc::TransportUnavailable);
  DetectOptions o;
  o.max_wait = 30;
  auto v = detect_lb_type(ip("157.240.0.1"), t, facebook_host_codec(), o);
  CHECK(v.type == LbType::Inconclusive);
  CHECK(v.follow_ups == 30);

  ScriptedTransport fixed;
  fixed.ids = false;
  CHECK_ERRC(detect_lb_type(ip("10.0.0.1"), fixed, facebook_host_codec()), Errc::Unsupported);
  ScriptedTransport refused;
  refused.answer = [](const HandshakeRequest&) { return HandshakeResult{}; };
  CHECK_ERRC(detect_lb_type(ip("10.0.0.1"), refused, facebook_host_codec()), Errc::TransportUnavailable);

  // One collision with the held instance is not a CID-aware window.
  ScriptedTransport collide;
  int calls = 0;
  collide.answer = [&](const HandshakeRequest&) {
    ++calls;
    return calls == 2 ? HandshakeResult{} : HandshakeResult{true, fb_cid(static_cast<uint32_t>(calls))};
  };
  CHECK(detect_lb_type(ip("10.0.0.1"), collide, facebook_host_codec()).type == LbType::FiveTuple);
}

TEST_CASE("campaign files") {
  auto c = parse_campaign(R"({"targets": {"base": "157.240.0.1", "count": 3}, "handshakes_per_vip": 50,
                              "port_strategy": "RandomSeeded", "seed": 4, "detect_lb_type": true, "max_wait": 100})");
  CHECK(c.targets.size() == 3);
  CHECK(c.targets[2] == ip("157.240.0.3"));
  CHECK(c.handshakes_per_vip == 50);
  CHECK(c.harvest.port_strategy == PortStrategy::RandomSeeded);
  CHECK(c.detection.seed == 4);
  CHECK(c.detect);
  CHECK(c.detection.max_wait == 100);
  CHECK_ERRC(parse_campaign(R"({"handshakes_per_vip": 0})"), Errc::InvalidConfig);
  CHECK_ERRC(parse_campaign(R"({"port_strategy": "Up"})"), Errc::InvalidConfig);
  CHECK_ERRC(parse_campaign("[1,"), Errc::InvalidConfig);
}

TEST_CASE("UDP transport replays the template and reads the server SCID") {
  int server = ::socket(AF_INET, SOCK_DGRAM, 0);
  REQUIRE(server >= 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  REQUIRE(::bind(server, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
  socklen_t len = sizeof addr;
  ::getsockname(server, reinterpret_cast<sockaddr*>(&addr), &len);

  wire::LongHeader initial;
  initial.dcid = *ConnectionId::from_hex("0011223344556677");
  initial.scid = *ConnectionId::from_hex("a1a2a3a4");
  std::vector<uint8_t> body(1150, 0);
  auto tmpl = wire::encode_long_header(initial, body);

  auto server_cid = fb_cid(77);
  std::thread responder([&] {
    std::vector<uint8_t> buf(2048);
    sockaddr_in from{};
    socklen_t flen = sizeof from;
    auto n = ::recvfrom(server, buf.data(), buf.size(), 0, reinterpret_cast<sockaddr*>(&from), &flen);
    if (n <= 0) return;
    auto got = wire::parse_long_header(std::span<const uint8_t>(buf.data(), static_cast<size_t>(n)), 0);
    wire::LongHeader reply;
    reply.dcid = got.scid;
    reply.scid = server_cid;
    auto bytes = wire::encode_long_header(reply, std::vector<uint8_t>(40, 1));
    ::sendto(server, bytes.data(), bytes.size(), 0, reinterpret_cast<sockaddr*>(&from), flen);
  });

  UdpTransportOptions o;
  o.server_port = ntohs(addr.sin_port);
  o.timeout = 2.0;
  UdpTransport udp(tmpl, o);
  CHECK(!udp.chooses_client_ids());
  auto r = udp.handshake(HandshakeRequest{ip("127.0.0.1"), 0, {}, {}});
  responder.join();
  ::close(server);
  REQUIRE(r.completed);
  CHECK(*r.server_cid == server_cid);
  CHECK(*facebook_host_codec()(*r.server_cid) == 77);

  CHECK_ERRC(UdpTransport(std::vector<uint8_t>{0x40, 1, 2}), Errc::InvalidConfig);
}
