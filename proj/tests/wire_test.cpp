#include <sstream>

#include "doctest.h"
#include "quicscatter/common/rng.hpp"
#include "quicscatter/common/text.hpp"
#include "quicscatter/wire/datagram.hpp"
#include "quicscatter/wire/packet.hpp"
#include "quicscatter/wire/varint.hpp"
#include "quicscatter/wire/version_registry.hpp"
#include "support.hpp"

using namespace quicscatter;
using namespace quicscatter::wire;

namespace {

std::vector<uint8_t> hex(std::string_view text) { return from_hex(text).value(); }

// Hand-encoded Initial: dcid 10..17, scid 20..27, empty token, 4-octet
// payload. Cross-checked with aioquic 1.3.0 pull_quic_header (packet_length 29).
const std::vector<uint8_t> kInitial = hex("c0000000010810111213141516170820212223242526270004aabbccdd");

// Handshake with the same CIDs and a 70-octet payload behind a two-octet
// length varint (0x4046). aioquic reports packet_length 95.
const std::vector<uint8_t> kHandshake = hex(
    "e0000000010810111213141516170820212223242526274046303132333435363738393a3b3c3d3e3f40414243444546"
    "4748494a4b4c4d4e4f505152535455565758595a5b5c5d5e5f606162636465666768696a6b6c6d6e6f707172737475");

std::vector<uint8_t> concat(std::vector<uint8_t> a, const std::vector<uint8_t>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

Datagram ports(uint16_t src, uint16_t dst) {
  Datagram d;
  d.src_port = src;
  d.dst_port = dst;
  return d;
}

}  // namespace

TEST_CASE("parse_long_header decodes a hand-encoded Initial") {
  auto h = parse_long_header(kInitial, 0);
  CHECK(h.type == PacketType::Initial);
  CHECK(h.version == 1u);
  CHECK(h.dcid.to_hex() == "1011121314151617");
  CHECK(h.scid.to_hex() == "2021222324252627");
  CHECK(h.token_length() == 0);
  CHECK(h.payload_length == 4u);
  CHECK(h.wire_length == 29);
  CHECK(to_hex(packet_payload(kInitial, 0, h)) == "aabbccdd");
}

TEST_CASE("version 0 forces version negotiation") {
  auto bytes = kInitial;
  bytes[1] = bytes[2] = bytes[3] = bytes[4] = 0;
  // Everything after the SCID becomes the version list: 0x0004aabb, 0xccdd...
  bytes.resize(bytes.size() - 1);
  bytes.push_back(0xdd);
  bytes.resize(23 + 8);
  auto h = parse_long_header(bytes, 0);
  CHECK(h.type == PacketType::VersionNegotiation);
  CHECK(h.version == 0u);
  CHECK_FALSE(h.payload_length.has_value());
  CHECK(h.supported_versions.size() == 2);
  CHECK(h.wire_length == bytes.size());
}

TEST_CASE("parse_long_header error paths") {
  auto bad_len = kInitial;
  bad_len[5] = 21;
  CHECK_ERRC(parse_long_header(bad_len, 0), Errc::InvalidCidLength);

  auto short_header = kInitial;
  short_header[0] = 0x40;
  CHECK_ERRC(parse_long_header(short_header, 0), Errc::NotLongHeader);

  for (size_t cut = 1; cut < kInitial.size(); ++cut) {
    std::span<const uint8_t> prefix(kInitial.data(), cut);
    CHECK_ERRC(parse_long_header(prefix, 0), Errc::TruncatedPacket);
  }
  CHECK_ERRC(parse_long_header(kInitial, kInitial.size()), Errc::TruncatedPacket);
}

TEST_CASE("Initial token is honored") {
  LongHeader h;
  h.dcid = ConnectionId(hex("0102"));
  h.token = hex("deadbeef");
  auto bytes = encode_long_header(h, hex("00112233"));
  auto parsed = parse_long_header(bytes, 0);
  CHECK(to_hex(parsed.token) == "deadbeef");
  CHECK(parsed.wire_length == bytes.size());
}

TEST_CASE("split_coalesced walks Initial followed by Handshake") {
  auto datagram = concat(kInitial, kHandshake);
  auto scan = scan_datagram(datagram);
  REQUIRE(scan.packets.size() == 2);
  CHECK(scan.packets[0].type == PacketType::Initial);
  CHECK(scan.packets[1].type == PacketType::Handshake);
  CHECK(scan.packets[0].wire_length + scan.packets[1].wire_length == datagram.size());
  CHECK(scan.fully_consumed);
}

TEST_CASE("split_coalesced ignores zero padding to 1200 octets") {
  auto datagram = kInitial;
  datagram.resize(1200, 0);
  auto scan = scan_datagram(datagram);
  REQUIRE(scan.packets.size() == 1);
  CHECK(scan.packets[0].type == PacketType::Initial);
  CHECK(scan.trailing_padding == 1200 - 29);
  CHECK(scan.consumed + scan.trailing_padding == datagram.size());
}

TEST_CASE("split_coalesced edge cases") {
  CHECK(split_coalesced({}).empty());
  std::vector<uint8_t> zeros(1200, 0);
  CHECK(split_coalesced(zeros).empty());

  // Short header after a long header stops the scan without failing it.
  auto mixed = concat(kInitial, hex("4101020304"));
  auto scan = scan_datagram(mixed);
  CHECK(scan.packets.size() == 1);
  CHECK(scan.short_header);
  CHECK_FALSE(scan.fully_consumed);

  // A truncated second packet keeps the first.
  auto cut = concat(kInitial, std::vector<uint8_t>(kHandshake.begin(), kHandshake.begin() + 40));
  CHECK(split_coalesced(cut).size() == 1);
}

TEST_CASE("classify_direction") {
  CHECK(classify_direction(ports(443, 50000)) == Direction::Response);
  CHECK(classify_direction(ports(50000, 443)) == Direction::Request);
  CHECK(classify_direction(ports(53, 53)) == Direction::NonQuic);
  CHECK(classify_direction(ports(443, 443)) == Direction::Response);
}

TEST_CASE("is_plausible_quic") {
  auto registry = VersionRegistry::defaults();
  CHECK(is_plausible_quic(kInitial, registry));
  CHECK_FALSE(is_plausible_quic(std::vector<uint8_t>(1200, 0), registry));

  auto unknown = kInitial;
  unknown[4] = 0x07;  // version 0x00000007
  CHECK_FALSE(is_plausible_quic(unknown, registry));
  CHECK(is_plausible_quic(unknown, registry, {.allow_greased = false, .allow_unknown = true}));

  auto greased = kInitial;
  greased[1] = greased[2] = greased[3] = greased[4] = 0x1a;
  CHECK_FALSE(is_plausible_quic(greased, registry));
  CHECK(is_plausible_quic(greased, registry, {.allow_greased = true}));

  LongHeader vn;
  vn.type = PacketType::VersionNegotiation;
  vn.version = 0;
  vn.supported_versions = {1};
  CHECK(is_plausible_quic(encode_long_header(vn, {}), registry));
}

TEST_CASE("encode_long_header examples") {
  LongHeader h;
  h.type = PacketType::Initial;
  h.version = 1;
  h.dcid = ConnectionId(hex("1011121314151617"));
  h.scid = ConnectionId(hex("2021222324252627"));
  auto bytes = encode_long_header(h, hex("aabbccdd"));
  CHECK(bytes == kInitial);

  LongHeader vn;
  vn.type = PacketType::VersionNegotiation;
  vn.version = 0;
  vn.dcid = h.scid;
  vn.scid = h.dcid;
  vn.supported_versions = {0x00000001, 0xfaceb002, 0xff00001d};
  auto vn_bytes = encode_long_header(vn, {});
  auto parsed = parse_long_header(vn_bytes, 0);
  CHECK(parsed.type == PacketType::VersionNegotiation);
  CHECK(parsed.supported_versions == vn.supported_versions);

  std::vector<uint8_t> too_long(21, 0xab);
  CHECK_ERRC(ConnectionId(too_long), Errc::InvalidCidLength);

  LongHeader mismatched;
  mismatched.version = 0;
  CHECK_ERRC(encode_long_header(mismatched, {}), Errc::InvalidConfig);
}

TEST_CASE("encode/parse round trip over generated headers") {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    LongHeader h;
    h.type = static_cast<PacketType>(rng.below(5));
    h.version = h.type == PacketType::VersionNegotiation ? 0 : static_cast<uint32_t>(rng.next() | 1);
    std::vector<uint8_t> buf(rng.below(21));
    rng.fill(buf);
    h.dcid = ConnectionId(buf);
    buf.resize(rng.below(21));
    rng.fill(buf);
    h.scid = ConnectionId(buf);
    h.flags = static_cast<uint8_t>(rng.below(h.type == PacketType::VersionNegotiation ? 128 : 16));
    std::vector<uint8_t> payload;
    if (h.type == PacketType::VersionNegotiation) {
      for (uint64_t k = rng.below(4); k > 0; --k) h.supported_versions.push_back(static_cast<uint32_t>(rng.next()));
    } else {
      payload.resize(rng.below(rng.chance(0.1) ? 20000 : 100));
      rng.fill(payload);
    }
    if (h.type == PacketType::Initial) {
      h.token.resize(rng.below(40));
      rng.fill(h.token);
    }

    auto bytes = encode_long_header(h, payload);
    auto parsed = parse_long_header(bytes, 0);
    if (h.type != PacketType::VersionNegotiation && h.type != PacketType::Retry) h.payload_length = payload.size();
    h.header_length = parsed.header_length;
    h.wire_length = bytes.size();
    REQUIRE(parsed == h);
    if (h.type != PacketType::VersionNegotiation) {
      auto body = packet_payload(bytes, 0, parsed);
      REQUIRE(std::vector<uint8_t>(body.begin(), body.end()) == payload);
    }
  }
}

TEST_CASE("parsers survive arbitrary input") {
  Rng rng(99);
  std::vector<uint8_t> buf;
  for (int i = 0; i < 20000; ++i) {
    buf.resize(rng.below(64));
    rng.fill(buf);
    if (!buf.empty() && rng.chance(0.5)) buf[0] |= 0x80;
    auto scan = scan_datagram(buf);
    CHECK(scan.consumed <= buf.size());
    (void)try_parse_long_header(buf, 0);
  }
}

TEST_CASE("varint boundaries") {
  for (uint64_t v : {uint64_t{0}, uint64_t{63}, uint64_t{64}, uint64_t{16383}, uint64_t{16384},
                     (uint64_t{1} << 30) - 1, uint64_t{1} << 30, kMaxVarint}) {
    std::vector<uint8_t> out;
    append_varint(out, v);
    auto read = read_varint(out);
    REQUIRE(read);
    CHECK(read->value == v);
    CHECK(read->length == out.size());
  }
  // RFC examples: 0x25 -> 37, 0x7bbd -> 15293.
  CHECK(read_varint(hex("25"))->value == 37);
  CHECK(read_varint(hex("7bbd"))->value == 15293);
  CHECK_FALSE(read_varint(hex("7b")).has_value());
}

TEST_CASE("version registry file") {
  std::istringstream in("# comment\n00000001\tQUICv1\n0xfaceb002\tFacebook mvfst 2\n\nff00001d\tdraft-29\n");
  auto r = VersionRegistry::parse(in);
  CHECK(r.label(1) == "QUICv1");
  CHECK(r.label(0xfaceb002) == "Facebook mvfst 2");
  CHECK(r.label(0x12345678) == "others");

  std::istringstream bad("zz\tnope\n");
  CHECK_ERRC(VersionRegistry::parse(bad), Errc::InvalidConfig);
}
