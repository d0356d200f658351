#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "quicscatter/offnet/classifier.hpp"
#include "quicscatter/scid/facebook_codec.hpp"
#include "quicscatter/sim/scenario.hpp"
#include "support.hpp"

using namespace quicscatter;
using namespace quicscatter::offnet;
using wire::ConnectionId;
using wire::PacketType;

namespace {

Ipv4Address ip(const char* s) { return Ipv4Address::from_string(s); }

struct Corpus {
  std::vector<telescope::Session> sessions;
  std::vector<telescope::DatagramSummary> datagrams;
};

Corpus corpus_from(const std::vector<wire::Datagram>& ds) {
  telescope::FilterConfig filter;
  filter.registry = wire::VersionRegistry::defaults();
  auto ing = telescope::ingest(std::span<const wire::Datagram>(ds), filter);
  Corpus c;
  c.sessions = telescope::sessionize(ing.records);
  for (const auto& r : ing.records) c.datagrams.push_back(telescope::summarize(r, "x"));
  return c;
}

Corpus flood(const char* profile, const char* vip, uint32_t host_base, size_t sources, uint64_t seed) {
  sim::ClusterConfig cfg;
  cfg.vips = {ip(vip)};
  cfg.l7lb_count = 4;
  cfg.host_id_base = host_base;
  auto cluster = sim::build_cluster(cfg, sim::default_stack_profiles().at(profile));
  std::vector<Ipv4Address> src;
  for (uint32_t i = 0; i < sources; ++i) src.emplace_back(ip("44.0.0.1").value() + i);
  return corpus_from(sim::simulate_flood(cluster, src, 600, seed).datagrams);
}

ConnectionId fb(uint8_t version, uint32_t host) { return scid::encode_facebook_scid({version, host, 1, 0}, 99); }

SourceFeatures features_of(std::vector<ConnectionId> scids) {
  return source_features(ip("198.51.100.1"), scids, {}, {});
}

}  // namespace

TEST_CASE("low host ID predicate boundaries") {
  CHECK(scid::low_host_id_predicate({1, 5, 0, 0}));
  CHECK(scid::low_host_id_predicate({1, 127, 0, 0}));
  CHECK(!scid::low_host_id_predicate({1, 128, 0, 0}));
  CHECK(!scid::low_host_id_predicate({2, 5, 0, 0}));
}

TEST_CASE("features of a Facebook off-net source") {
  auto c = flood("Facebook", "198.51.100.7", 5, 60, 1);
  auto feats = extract_features(c.sessions, c.datagrams);
  REQUIRE(feats.size() == 1);
  const auto& f = feats[0];
  CHECK(f.source == ip("198.51.100.7"));
  CHECK(f.scid_structured);
  CHECK(f.scid_scheme_match == std::optional<std::string>("Facebook"));
  CHECK(!f.coalescence);
  REQUIRE(f.rto_signature);
  CHECK(f.rto_signature->initial_rto == doctest::Approx(0.4));
  CHECK(f.low_host_id == std::optional<bool>(true));
  CHECK(f.scid_count == 60);
  CHECK(f.length_signature ==
        std::set<fingerprint::LengthKey>{{{PacketType::Initial}, 1232}, {{PacketType::Handshake}, 1232}});
  auto rules = default_rules();
  for (const auto& r : rules.rules) CHECK_MESSAGE(classify(f, r, rules.target) == "Facebook", r.name);
}

TEST_CASE("features of Cloudflare and sparse sources") {
  auto c = flood("Cloudflare", "104.16.0.1", 1, 20, 2);
  auto feats = extract_features(c.sessions, c.datagrams);
  REQUIRE(feats.size() == 1);
  CHECK(feats[0].scid_scheme_match == std::optional<std::string>("Cloudflare"));
  CHECK(feats[0].scid_structured);
  CHECK(!feats[0].low_host_id);
  CHECK(classify(feats[0], default_rules(), "scid") == kNotOperator);

  // One datagram: nothing to estimate a timeout from.
  auto g = flood("Generic", "203.0.113.9", 1, 1, 3);
  telescope::Session one = g.sessions.at(0);
  one.timeline.resize(1);
  auto sparse = extract_features(std::span(&one, 1), std::span(g.datagrams.data(), 1));
  REQUIRE(sparse.size() == 1);
  CHECK(!sparse[0].rto_signature);
  CHECK(sparse[0].datagram_count == 1);
}

TEST_CASE("low_host_id is set only by v1 decodes") {
  CHECK(features_of({fb(1, 5), fb(1, 100)}).low_host_id == std::optional<bool>(true));
  CHECK(features_of({fb(1, 5), fb(1, 9000)}).low_host_id == std::optional<bool>(false));
  CHECK(!features_of({fb(2, 5)}).low_host_id);
  CHECK(features_of({fb(2, 5)}).scid_scheme_match == std::optional<std::string>("Facebook"));
  auto mixed = features_of({fb(1, 5), *ConnectionId::from_hex("c0ffee0000000000")});
  CHECK(!mixed.scid_scheme_match);
  CHECK(mixed.low_host_id == std::optional<bool>(true));
  CHECK(!features_of({}).scid_scheme_match);
  CHECK(!features_of({*ConnectionId::from_hex("4001")}).scid_scheme_match);
}

TEST_CASE("rule classification") {
  auto rules = default_rules();
  CHECK(rules.rules.size() == 9);
  auto low = features_of({fb(1, 5)});
  CHECK(classify(low, rules, "SCID off-net (low host ID)") == "Facebook");
  CHECK(classify(low, rules, "scid-offnet-low-host-id") == "Facebook");
  auto high = features_of({fb(1, 9000)});
  CHECK(classify(high, rules, "scid-offnet-low-host-id") == kNotOperator);
  CHECK(classify(high, rules, "scid") == "Facebook");
  CHECK_ERRC(classify(low, rules, "no-such-rule"), Errc::UnknownRule);

  SourceFeatures f;
  f.rto_signature = fingerprint::RtoEstimate{0.45, 2.0, 8, 8, 1};
  CHECK(feature_matches(f, Feature::InterArrival, rules.target));
  f.rto_signature->initial_rto = 0.3;  // 25% off, outside tolerance
  CHECK(!feature_matches(f, Feature::InterArrival, rules.target));
  f.rto_signature = fingerprint::RtoEstimate{0.4, 2.0, 2, 5, 1};
  CHECK(!feature_matches(f, Feature::InterArrival, rules.target));
  f.rto_signature->backoff_base = 3.0;
  f.rto_signature->retransmissions_max = 8;
  CHECK(!feature_matches(f, Feature::InterArrival, rules.target));
  CHECK(!feature_matches(SourceFeatures{}, Feature::PacketLength, rules.target));
  CHECK(feature_matches(SourceFeatures{}, Feature::Coalescence, rules.target));
}

TEST_CASE("classification is independent of source order") {
  auto a = flood("Facebook", "198.51.100.7", 5, 40, 4);
  auto b = flood("Google", "198.51.100.8", 1, 40, 5);
  Corpus all = a;
  all.sessions.insert(all.sessions.end(), b.sessions.begin(), b.sessions.end());
  all.datagrams.insert(all.datagrams.end(), b.datagrams.begin(), b.datagrams.end());
  auto base = extract_features(all.sessions, all.datagrams);
  std::mt19937 shuffler(1);
  std::shuffle(all.sessions.begin(), all.sessions.end(), shuffler);
  std::shuffle(all.datagrams.begin(), all.datagrams.end(), shuffler);
  auto again = extract_features(all.sessions, all.datagrams);
  REQUIRE(base.size() == again.size());
  auto rules = default_rules();
  for (size_t i = 0; i < base.size(); ++i) {
    CHECK(base[i].source == again[i].source);
    CHECK(base[i].length_signature == again[i].length_signature);
    for (const auto& r : rules.rules) CHECK(classify(base[i], r, rules.target) == classify(again[i], r, rules.target));
  }
}

TEST_CASE("evaluate matches the confusion-matrix arithmetic") {
  // TP 3, FP 1, TN 5, FN 1.
  std::vector<std::pair<Ipv4Address, std::string>> preds;
  GroundTruth truth;
  auto add = [&](const char* predicted, const char* actual) {
    Ipv4Address a(static_cast<uint32_t>(0x0a000000 + truth.size()));
    preds.emplace_back(a, predicted);
    truth[a] = actual;
  };
  for (int i = 0; i < 3; ++i) add("Facebook", "Facebook");
  add("Facebook", "NotOperator");
  for (int i = 0; i < 5; ++i) add("NotOperator", "Google");
  add("NotOperator", "Facebook");
  auto m = evaluate(preds, truth, "Facebook");
  CHECK(m.tp == 3);
  CHECK(m.fp == 1);
  CHECK(m.tn == 5);
  CHECK(m.fn == 1);
  CHECK(*m.tpr == 0.75);
  CHECK(*m.fpr == 1.0 / 6.0);
  CHECK(*m.tnr == 5.0 / 6.0);
  CHECK(*m.fnr == 0.25);
  CHECK(*m.precision == 0.75);
  CHECK(*m.recall == 0.75);

  auto perfect = metrics_from_counts(4, 0, 6, 0);
  CHECK(*perfect.tpr == 1.0);
  CHECK(*perfect.fpr == 0.0);
  auto paper_like = metrics_from_counts(303, 13, 468, 0);
  CHECK(*paper_like.tpr == 1.0);

  auto none = metrics_from_counts(0, 0, 7, 0);
  CHECK(!none.tpr);
  CHECK(!none.fnr);
  CHECK(!none.precision);
  CHECK(*none.tnr == 1.0);

  preds.emplace_back(ip("1.2.3.4"), "Facebook");
  CHECK_ERRC(evaluate(preds, truth, "Facebook"), Errc::MissingLabel);
}

TEST_CASE("complementary rates sum to one") {
  Rng rng(12);
  for (int i = 0; i < 1000; ++i) {
    auto m = metrics_from_counts(rng.below(50), rng.below(50), rng.below(50), rng.below(50));
    if (m.tpr) CHECK(*m.tpr + *m.fnr == doctest::Approx(1.0));
    if (m.fpr) CHECK(*m.fpr + *m.tnr == doctest::Approx(1.0));
  }
}

TEST_CASE("random SCIDs collide with the low host ID rule at the analytic rate") {
  // A uniform 8-octet SCID passes when its version bits read 01 and the top
  // 9 host bits are zero: 2^-2 * 2^-9.
  const double p = std::ldexp(1.0, -11);
  const size_t n = 40000;
  Rng rng(2024);
  auto rules = default_rules();
  const auto& rule = rules.find("scid-offnet-low-host-id");
  size_t hits = 0;
  for (size_t i = 0; i < n; ++i) {
    std::array<uint8_t, 8> b{};
    rng.fill(b);
    hits += classify(features_of({ConnectionId(b)}), rule, rules.target) == "Facebook";
  }
  double sigma = std::sqrt(n * p * (1 - p));
  CHECK(std::abs(static_cast<double>(hits) - n * p) <= 3 * sigma);
  for (uint32_t host = 0; host < 128; ++host) CHECK(classify(features_of({fb(1, host)}), rule, rules.target) == "Facebook");
}

TEST_CASE("rule and truth files") {
  auto set = parse_rules(R"({
    "target": {"label": "Facebook", "initial_rto": 0.4, "retransmissions": [7, 9],
               "lengths": ["Initial:1232", "Initial,Handshake:1250"]},
    "rules": [{"name": "scid", "title": "SCID", "features": ["scid"]},
              {"name": "low", "features": ["scid", "low-host-id"]}]})");
  CHECK(set.rules.size() == 2);
  CHECK(set.find("SCID").name == "scid");
  CHECK(set.find("low").title == "low");
  CHECK(set.target.lengths.count({{PacketType::Initial, PacketType::Handshake}, 1250}) == 1);
  CHECK_ERRC(parse_rules(R"({"rules": [{"name": "x", "features": ["telepathy"]}]})"), Errc::InvalidConfig);
  CHECK_ERRC(parse_rules(R"({"rules": [{"name": "x", "features": []}]})"), Errc::InvalidConfig);
  CHECK_ERRC(parse_rules("{"), Errc::InvalidConfig);

  fingerprint::LengthKey k{{PacketType::Initial, PacketType::Handshake}, 1250};
  CHECK(length_key_text(k) == "Initial,Handshake:1250");
  CHECK(parse_length_key(length_key_text(k)) == k);
  CHECK_ERRC(parse_length_key("Initial"), Errc::InvalidConfig);
  CHECK_ERRC(parse_length_key("Bogus:12"), Errc::InvalidConfig);

  std::istringstream in("# ip\tlabel\n198.51.100.7\tFacebook\n\n203.0.113.9\tNotOperator\n198.51.100.7\tFacebook\n");
  auto truth = parse_truth(in);
  CHECK(truth.size() == 2);
  CHECK(truth.at(ip("203.0.113.9")) == "NotOperator");
  std::istringstream conflict("1.1.1.1\tA\n1.1.1.1\tB\n");
  CHECK_ERRC(parse_truth(conflict), Errc::InvalidConfig);
  std::istringstream bad("1.1.1\tA\n");
  CHECK_ERRC(parse_truth(bad), Errc::InvalidConfig);
}
