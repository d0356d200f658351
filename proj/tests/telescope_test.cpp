#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "quicscatter/common/rng.hpp"
#include "quicscatter/telescope/ingest.hpp"
#include "support.hpp"

using namespace quicscatter;
using namespace quicscatter::telescope;
using wire::ConnectionId;
using wire::Datagram;
using wire::LongHeader;
using wire::PacketType;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "quicscatter_telescope_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

ConnectionId cid(uint8_t fill, size_t n = 8) { return ConnectionId(std::vector<uint8_t>(n, fill)); }

std::vector<uint8_t> packet(PacketType type, const ConnectionId& dcid, const ConnectionId& scid, size_t payload = 40,
                            uint32_t version = 1) {
  LongHeader h;
  h.type = type;
  h.version = version;
  h.dcid = dcid;
  h.scid = scid;
  return wire::encode_long_header(h, std::vector<uint8_t>(payload, 0x5a));
}

Datagram response(double t, const std::string& src, const std::string& dst, std::vector<uint8_t> payload) {
  return Datagram{t, Ipv4Address::from_string(src), Ipv4Address::from_string(dst), 443, 40000, std::move(payload)};
}

Datagram request(double t, const std::string& src, const std::string& dst, std::vector<uint8_t> payload) {
  return Datagram{t, Ipv4Address::from_string(src), Ipv4Address::from_string(dst), 40000, 443, std::move(payload)};
}

// Ethernet-framed pcap built byte by byte, independent of PcapWriter.
class EthernetCapture {
 public:
  EthernetCapture() {
    le32(0xa1b2c3d4);
    le16(2);
    le16(4);
    le32(0);
    le32(0);
    le32(65535);
    le32(1);
  }

  void add(double t, uint8_t proto, uint32_t src, uint32_t dst, uint16_t sport, uint16_t dport,
           const std::vector<uint8_t>& payload) {
    std::vector<uint8_t> frame(12, 0x02);
    frame.push_back(0x08);
    frame.push_back(0x00);
    size_t l4 = proto == 17 ? 8 : 20;
    uint16_t total = static_cast<uint16_t>(20 + l4 + payload.size());
    std::vector<uint8_t> ip = {0x45, 0, static_cast<uint8_t>(total >> 8), static_cast<uint8_t>(total), 0, 0, 0, 0, 64, proto, 0, 0};
    for (uint32_t a : {src, dst}) {
      for (int s = 24; s >= 0; s -= 8) ip.push_back(static_cast<uint8_t>(a >> s));
    }
    frame.insert(frame.end(), ip.begin(), ip.end());
    frame.push_back(static_cast<uint8_t>(sport >> 8));
    frame.push_back(static_cast<uint8_t>(sport));
    frame.push_back(static_cast<uint8_t>(dport >> 8));
    frame.push_back(static_cast<uint8_t>(dport));
    if (proto == 17) {
      uint16_t len = static_cast<uint16_t>(8 + payload.size());
      frame.push_back(static_cast<uint8_t>(len >> 8));
      frame.push_back(static_cast<uint8_t>(len));
      frame.push_back(0);
      frame.push_back(0);
    } else {
      frame.resize(frame.size() + 16, 0);
    }
    frame.insert(frame.end(), payload.begin(), payload.end());
    le32(static_cast<uint32_t>(t));
    le32(static_cast<uint32_t>((t - static_cast<uint32_t>(t)) * 1e6));
    le32(static_cast<uint32_t>(frame.size()));
    le32(static_cast<uint32_t>(frame.size()));
    bytes_.insert(bytes_.end(), frame.begin(), frame.end());
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes_.data()), static_cast<std::streamsize>(bytes_.size()));
  }

  std::vector<uint8_t>& bytes() { return bytes_; }

 private:
  void le32(uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void le16(uint16_t v) {
    bytes_.push_back(static_cast<uint8_t>(v));
    bytes_.push_back(static_cast<uint8_t>(v >> 8));
  }
  std::vector<uint8_t> bytes_;
};

}  // namespace

TEST_CASE("ingest filters a capture with three backscatter datagrams and one TCP packet") {
  EthernetCapture cap;
  auto initial = packet(PacketType::Initial, cid(1), cid(2));
  cap.add(1.0, 17, 0x9df00001, 0x2c000001, 443, 50000, initial);
  cap.add(1.5, 6, 0x01020304, 0x2c000002, 443, 50001, {});
  cap.add(2.0, 17, 0x9df00001, 0x2c000003, 443, 50002, initial);
  cap.add(3.0, 17, 0x9df00002, 0x2c000004, 443, 50003, initial);
  auto path = temp_path("three_plus_tcp.pcap");
  cap.save(path);

  auto result = ingest(path, {});
  CHECK(result.records.size() == 3);
  CHECK(result.counters.frames == 4);
  CHECK(result.counters.non_udp == 1);
  CHECK(result.counters.skipped() == 1);
  CHECK(result.records[0].datagram.src_ip.to_string() == "157.240.0.1");
  CHECK(result.records[0].direction == wire::Direction::Response);
  CHECK(result.records[0].packets.size() == 1);
}

TEST_CASE("ingest counts non-QUIC UDP and implausible payloads") {
  EthernetCapture cap;
  cap.add(1.0, 17, 0x08080808, 0x2c000001, 53, 53, std::vector<uint8_t>(30, 1));
  cap.add(2.0, 17, 0x08080808, 0x2c000001, 443, 53, std::vector<uint8_t>(1200, 0));
  auto path = temp_path("junk.pcap");
  cap.save(path);
  auto result = ingest(path, {});
  CHECK(result.records.empty());
  CHECK(result.counters.non_quic == 1);
  CHECK(result.counters.implausible == 1);
}

TEST_CASE("scan request and response both survive ingest, sanitize drops the request") {
  std::vector<Datagram> datagrams = {
      request(1.0, "192.0.2.10", "44.0.0.1", packet(PacketType::Initial, cid(3), cid(4))),
      response(1.2, "192.0.2.10", "44.0.0.2", packet(PacketType::Initial, cid(5), cid(6))),
  };
  auto path = temp_path("scan.pcap");
  write_capture(path, datagrams);
  auto result = ingest(path, {});
  REQUIRE(result.records.size() == 2);
  CHECK(result.records[0].datagram == datagrams[0]);

  std::istringstream list("192.0.2.0/24  # research scanner\n");
  auto scanners = ScannerList::parse(list);
  SanitizeCounters counters;
  auto kept = sanitize(result.records, scanners, &counters);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].direction == wire::Direction::Response);
  CHECK(counters.removed == 1);
  CHECK(counters.inspected == 2);
  CHECK(counters.removed_fraction() == doctest::Approx(0.5));

  auto identity = sanitize(result.records, ScannerList{});
  CHECK(identity.size() == 2);
}

TEST_CASE("empty and unreadable captures") {
  auto path = temp_path("empty.pcap");
  write_capture(path, {});
  auto result = ingest(path, {});
  CHECK(result.records.empty());
  CHECK(result.counters.frames == 0);
  CHECK(result.counters.skipped() == 0);

  CHECK_ERRC(ingest(temp_path("missing.pcap"), {}), Errc::UnreadableCapture);
  auto junk = temp_path("junk.bin");
  std::ofstream(junk) << "definitely not a capture file";
  CHECK_ERRC(ingest(junk, {}), Errc::UnreadableCapture);
}

TEST_CASE("truncated record is counted as malformed") {
  EthernetCapture cap;
  auto initial = packet(PacketType::Initial, cid(1), cid(2));
  cap.add(1.0, 17, 0x9df00001, 0x2c000001, 443, 50000, initial);
  cap.add(2.0, 17, 0x9df00001, 0x2c000001, 443, 50000, initial);
  cap.bytes().resize(cap.bytes().size() - 10);
  auto path = temp_path("truncated.pcap");
  cap.save(path);
  auto result = ingest(path, {});
  CHECK(result.records.size() == 1);
  CHECK(result.counters.malformed == 1);
}

TEST_CASE("pcap writer output reads back identically") {
  Rng rng(5);
  std::vector<Datagram> datagrams;
  for (int i = 0; i < 50; ++i) {
    std::vector<uint8_t> payload(rng.below(1400));
    rng.fill(payload);
    datagrams.push_back(Datagram{1640995200.0 + i * 0.25, Ipv4Address(static_cast<uint32_t>(rng.next())),
                                 Ipv4Address(static_cast<uint32_t>(rng.next())), static_cast<uint16_t>(rng.next()),
                                 static_cast<uint16_t>(rng.next()), payload});
  }
  auto path = temp_path("roundtrip.pcap");
  write_capture(path, datagrams);
  PcapReader reader(path);
  CHECK(reader.link_type() == LinkType::Raw);
  for (const auto& expected : datagrams) {
    auto frame = reader.next();
    REQUIRE(frame);
    auto decoded = decode_frame(reader.link_type(), *frame);
    REQUIRE(decoded.verdict == FrameVerdict::Udp);
    CHECK(decoded.datagram.timestamp == doctest::Approx(expected.timestamp).epsilon(1e-12));
    CHECK(decoded.datagram.payload == expected.payload);
    CHECK(decoded.datagram.src_port == expected.src_port);
    CHECK(decoded.datagram.dst_ip == expected.dst_ip);
  }
  CHECK_FALSE(reader.next());
  CHECK_FALSE(reader.truncated());
}

TEST_CASE("map_to_as uses longest-prefix match") {
  std::istringstream in(
      "157.240.0.0/16\t32934\tFacebook\n"
      "44.0.0.0/9\t7377\tTelescope\n"
      "44.1.2.0/24\tAS64500\tNested\n");
  auto table = PrefixTable::parse(in);
  CHECK(map_to_as(Ipv4Address::from_string("44.1.2.3"), table)->asn == 64500);
  CHECK(map_to_as(Ipv4Address::from_string("44.1.3.3"), table)->label == "Telescope");
  CHECK(map_to_as(Ipv4Address::from_string("157.240.9.9"), table)->label == "Facebook");
  CHECK_FALSE(map_to_as(Ipv4Address::from_string("8.8.8.8"), table).has_value());

  std::istringstream bad("not-a-prefix\t1\tx\n");
  CHECK_ERRC(PrefixTable::parse(bad), Errc::InvalidConfig);
}

TEST_CASE("map_to_as is independent of entry order") {
  Rng rng(17);
  std::vector<std::pair<Ipv4Prefix, AsInfo>> entries;
  for (int i = 0; i < 300; ++i) {
    int length = static_cast<int>(rng.between(8, 28));
    Ipv4Prefix p{Ipv4Address(static_cast<uint32_t>(rng.next()) & 0x0f0fffffu), length};
    p.network = Ipv4Address(p.network.value() & p.mask());
    entries.push_back({p, AsInfo{static_cast<uint32_t>(rng.below(50)), "op" + std::to_string(rng.below(5))}});
    if (i % 7 == 0) entries.push_back({p, AsInfo{static_cast<uint32_t>(rng.below(50)), "dup"}});
  }
  PrefixTable a;
  for (const auto& [p, info] : entries) a.add(p, info);
  std::mt19937 shuffle_rng(3);
  for (int round = 0; round < 3; ++round) {
    std::shuffle(entries.begin(), entries.end(), shuffle_rng);
    PrefixTable b;
    for (const auto& [p, info] : entries) b.add(p, info);
    for (int q = 0; q < 2000; ++q) {
      Ipv4Address ip(static_cast<uint32_t>(rng.next()) & 0x0f0fffffu);
      REQUIRE(a.lookup(ip) == b.lookup(ip));
    }
  }
}

TEST_CASE("sanitize is idempotent") {
  Rng rng(23);
  std::vector<CaptureRecord> records;
  for (int i = 0; i < 500; ++i) {
    auto ip = "10.0." + std::to_string(rng.below(4)) + "." + std::to_string(rng.below(255));
    auto d = rng.chance(0.5) ? request(i, ip, "44.0.0.1", packet(PacketType::Initial, cid(1), cid(2)))
                             : response(i, ip, "44.0.0.1", packet(PacketType::Initial, cid(1), cid(2)));
    IngestCounters c;
    records.push_back(*make_record(d, {}, c));
  }
  std::istringstream list("10.0.1.0/24\n10.0.2.7\n");
  auto scanners = ScannerList::parse(list);
  auto once = sanitize(records, scanners);
  auto twice = sanitize(once, scanners);
  REQUIRE(once.size() == twice.size());
  CHECK(once.size() < records.size());
  for (size_t i = 0; i < once.size(); ++i) CHECK(once[i].datagram == twice[i].datagram);
}

namespace {

std::vector<CaptureRecord> records_of(const std::vector<Datagram>& datagrams) {
  return ingest(datagrams, {}).records;
}

}  // namespace

TEST_CASE("sessionize groups resends under one key") {
  std::vector<Datagram> datagrams;
  for (int i = 0; i < 10; ++i) {
    datagrams.push_back(response(100.0 + i * 14.5 / 9, "157.240.0.1", "44.0.0.9",
                                 packet(PacketType::Initial, cid(7), cid(8))));
  }
  auto sessions = sessionize(records_of(datagrams));
  REQUIRE(sessions.size() == 1);
  CHECK(sessions[0].timeline.size() == 10);
  CHECK(sessions[0].timeline.front().offset == 0.0);
  CHECK(sessions[0].timeline.back().offset == doctest::Approx(14.5));
  CHECK(sessions[0].direction == wire::Direction::Response);
}

TEST_CASE("sessionize splits on idle gap and on key") {
  std::vector<Datagram> gap = {
      response(0.0, "157.240.0.1", "44.0.0.9", packet(PacketType::Initial, cid(7), cid(8))),
      response(600.0, "157.240.0.1", "44.0.0.9", packet(PacketType::Initial, cid(7), cid(8))),
  };
  CHECK(sessionize(records_of(gap), 60.0).size() == 2);
  CHECK(sessionize(records_of(gap), 601.0).size() == 1);

  std::vector<Datagram> keys = {
      response(0.0, "157.240.0.1", "44.0.0.9", packet(PacketType::Initial, cid(7), cid(8))),
      response(0.1, "157.240.0.1", "44.0.0.9", packet(PacketType::Initial, cid(9), cid(8))),
  };
  CHECK(sessionize(records_of(keys)).size() == 2);
}

TEST_CASE("coalesced datagrams add one entry per packet at the same offset") {
  auto payload = packet(PacketType::Initial, cid(7), cid(8));
  auto hs = packet(PacketType::Handshake, cid(7), cid(8), 900);
  payload.insert(payload.end(), hs.begin(), hs.end());
  std::vector<Datagram> datagrams = {response(5.0, "142.250.0.1", "44.0.0.9", payload),
                                     response(5.3, "142.250.0.1", "44.0.0.9", payload)};
  auto sessions = sessionize(records_of(datagrams));
  REQUIRE(sessions.size() == 1);
  REQUIRE(sessions[0].timeline.size() == 4);
  CHECK(sessions[0].timeline[0].type == PacketType::Initial);
  CHECK(sessions[0].timeline[1].type == PacketType::Handshake);
  CHECK(sessions[0].timeline[1].offset == 0.0);
  CHECK(sessions[0].timeline[2].offset == doctest::Approx(0.3));
  CHECK(sessions[0].timeline[0].coalesced);
  CHECK(sessions[0].timeline[0].datagram_length == payload.size());
}

TEST_CASE("sessionize partitions its input") {
  Rng rng(31);
  std::vector<Datagram> datagrams;
  for (int i = 0; i < 2000; ++i) {
    auto src = "157.240.0." + std::to_string(rng.below(5));
    auto payload = packet(rng.chance(0.5) ? PacketType::Initial : PacketType::Handshake,
                          cid(static_cast<uint8_t>(rng.below(4))), cid(static_cast<uint8_t>(rng.below(4))));
    if (rng.chance(0.3)) {
      auto extra = packet(PacketType::Handshake, cid(9), cid(9));
      payload.insert(payload.end(), extra.begin(), extra.end());
    }
    datagrams.push_back(response(rng.unit() * 1000.0, src, "44.0.0.1", payload));
  }
  auto result = ingest(datagrams, {});
  auto sessions = sessionize(result.records, 60.0);
  size_t entries = 0;
  for (const auto& s : sessions) {
    entries += s.timeline.size();
    CHECK(s.timeline.front().offset == 0.0);
    CHECK(std::is_sorted(s.timeline.begin(), s.timeline.end(),
                         [](const TimelineEntry& a, const TimelineEntry& b) { return a.offset < b.offset; }));
  }
  CHECK(entries == result.counters.long_header_packets);
}
