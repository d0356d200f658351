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

#include "quicscatter/offnet/classifier.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "quicscatter/common/error.hpp"
#include "quicscatter/common/text.hpp"
#include "quicscatter/scid/facebook_codec.hpp"
#include "quicscatter/scid/scheme.hpp"

namespace quicscatter::offnet {

using fingerprint::LengthKey;

namespace {

bool all_facebook(std::span<const wire::ConnectionId> scids, std::optional<bool>& low_host_id) {
  bool all = !scids.empty();
  bool any_v1 = false, all_low = true;
  for (const auto& cid : scids) {
    if (cid.size() != scid::kFacebookScidLength) {
      all = false;
      continue;
    }
    try {
      auto f = scid::decode_facebook_scid(cid);
      if (f.scid_version == 1) {
        any_v1 = true;
        all_low = all_low && scid::low_host_id_predicate(f);
      }
    } catch (const Error&) {
      all = false;
    }
  }
  if (any_v1) low_host_id = all_low;
  return all;
}

bool uniformity_flags(std::span<const wire::ConnectionId> scids, const scid::UniformityConfig& config) {
  try {
    scid::SchemeConfig sc;
    sc.uniformity = config;
    return scid::classify_scheme(scids, std::nullopt, sc).kind == scid::SchemeKind::Structured;
  } catch (const Error& e) {
    if (e.code() == Errc::InsufficientSamples || e.code() == Errc::MixedLengths) return false;
    throw;
  }
}

}  // namespace

SourceFeatures source_features(Ipv4Address source, std::span<const wire::ConnectionId> scids,
                               std::span<const telescope::Session> sessions,
                               std::span<const telescope::DatagramSummary> datagrams, const FeatureConfig& config) {
  SourceFeatures f;
  f.source = source;
  f.scid_count = scids.size();
  f.datagram_count = datagrams.size();

  std::optional<bool> low;
  if (all_facebook(scids, low)) {
    f.scid_scheme_match = "Facebook";
  } else if (scid::detect_cloudflare_signature(scids)) {
    f.scid_scheme_match = "Cloudflare";
  }
  f.low_host_id = low;
  f.scid_structured = f.scid_scheme_match.has_value() || uniformity_flags(scids, config.uniformity);

  size_t coalesced = 0;
  for (const auto& d : datagrams) {
    coalesced += d.coalesced();
    f.length_signature.insert(LengthKey{d.types, d.length});
  }
  f.coalescence = !datagrams.empty() &&
                  static_cast<double>(coalesced) >= config.coalescence_min_share * static_cast<double>(datagrams.size());

  try {
    f.rto_signature = fingerprint::estimate_rto(sessions, config.rto);
  } catch (const Error& e) {
    if (e.code() != Errc::InsufficientData) throw;
  }
  return f;
}

std::vector<SourceFeatures> extract_features(std::span<const telescope::Session> sessions,
                                             std::span<const telescope::DatagramSummary> datagrams,
                                             const FeatureConfig& config) {
  struct Bucket {
    std::vector<wire::ConnectionId> scids;
    std::unordered_set<wire::ConnectionId> seen;
    std::vector<telescope::Session> sessions;
    std::vector<telescope::DatagramSummary> datagrams;
  };
  std::map<Ipv4Address, Bucket> by_source;
  for (const auto& s : sessions) {
    if (s.direction != wire::Direction::Response) continue;
    auto& b = by_source[s.key.src_ip];
    if (b.seen.insert(s.key.scid).second) b.scids.push_back(s.key.scid);
    b.sessions.push_back(s);
  }
  for (const auto& d : datagrams) {
    if (d.direction != wire::Direction::Response) continue;
    by_source[d.src_ip].datagrams.push_back(d);
  }
  std::vector<SourceFeatures> out;
  out.reserve(by_source.size());
  for (const auto& [ip, b] : by_source) out.push_back(source_features(ip, b.scids, b.sessions, b.datagrams, config));
  return out;
}

std::string_view feature_name(Feature f) {
  switch (f) {
    case Feature::Scid: return "scid";
    case Feature::Coalescence: return "coalescence";
    case Feature::InterArrival: return "inter-arrival";
    case Feature::PacketLength: return "packet-length";
    case Feature::LowHostId: return "low-host-id";
  }
  return "?";
}

std::optional<Feature> feature_from_name(std::string_view name) {
  for (auto f : {Feature::Scid, Feature::Coalescence, Feature::InterArrival, Feature::PacketLength, Feature::LowHostId})
    if (feature_name(f) == name) return f;
  return std::nullopt;
}

const Rule& RuleSet::find(std::string_view name) const {
  for (const auto& r : rules)
    if (r.name == name || r.title == name) return r;
  fail(Errc::UnknownRule, "no rule named " + std::string(name));
}

RuleSet default_rules() {
  RuleSet set;
  set.target.lengths = {LengthKey{{wire::PacketType::Initial}, 1232}, LengthKey{{wire::PacketType::Handshake}, 1232}};
  using F = Feature;
  set.rules = {
      {"inter-arrival", "Inter arrival time", {F::InterArrival}},
      {"scid-inter-arrival", "SCID & Inter arrival time", {F::Scid, F::InterArrival}},
      {"scid-coalescence-inter-arrival", "SCID & coalescence & Inter arrival time", {F::Scid, F::Coalescence, F::InterArrival}},
      {"packet-length", "QUIC packet length", {F::PacketLength}},
      {"scid-coalescence-packet-length", "SCID & coalescence & QUIC packet length", {F::Scid, F::Coalescence, F::PacketLength}},
      {"coalescence", "Coalescence", {F::Coalescence}},
      {"scid", "SCID", {F::Scid}},
      {"scid-coalescence", "SCID & coalescence", {F::Scid, F::Coalescence}},
      {"scid-offnet-low-host-id", "SCID off-net (low host ID)", {F::Scid, F::LowHostId}},
  };
  return set;
}

std::string length_key_text(const LengthKey& key) {
  return fingerprint::length_key_label(key) + ":" + std::to_string(key.length);
}

LengthKey parse_length_key(std::string_view text) {
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos) fail(Errc::InvalidConfig, "length key needs types:length");
  LengthKey key;
  for (const auto& part : split(text.substr(0, colon), ',')) {
    auto t = wire::packet_type_from_name(trim(part));
    if (!t) fail(Errc::InvalidConfig, "unknown packet type in length key: " + std::string(part));
    key.types.push_back(*t);
  }
  try {
    key.length = static_cast<uint32_t>(std::stoul(std::string(text.substr(colon + 1))));
  } catch (const std::logic_error&) {
    fail(Errc::InvalidConfig, "bad length in length key " + std::string(text));
  }
  return key;
}

namespace {

using nlohmann::json;

RuleTarget target_from_json(const json& j) {
  RuleTarget t;
  t.label = j.value("label", t.label);
  t.scid_scheme = j.value("scid_scheme", t.scid_scheme);
  t.coalescence = j.value("coalescence", t.coalescence);
  t.rto.initial_rto = j.value("initial_rto", t.rto.initial_rto);
  t.rto.backoff_base = j.value("backoff_base", t.rto.backoff_base);
  if (j.contains("retransmissions")) {
    t.rto.retransmissions_min = j.at("retransmissions").at(0).get<int>();
    t.rto.retransmissions_max = j.at("retransmissions").at(1).get<int>();
  }
  t.rto_tolerance = j.value("rto_tolerance", t.rto_tolerance);
  t.backoff_tolerance = j.value("backoff_tolerance", t.backoff_tolerance);
  for (const auto& l : j.value("lengths", json::array())) t.lengths.insert(parse_length_key(l.get<std::string>()));
  if (t.rto.initial_rto <= 0 || t.rto.retransmissions_min > t.rto.retransmissions_max || t.rto_tolerance < 0)
    fail(Errc::InvalidConfig, "rule target violates RTO invariants");
  return t;
}

}  // namespace

RuleSet parse_rules(const std::string& json_text) {
  try {
    auto doc = json::parse(json_text);
    RuleSet set;
    if (doc.contains("target")) set.target = target_from_json(doc.at("target"));
    for (const auto& r : doc.at("rules")) {
      Rule rule;
      rule.name = r.at("name").get<std::string>();
      rule.title = r.value("title", rule.name);
      for (const auto& f : r.at("features")) {
        auto feature = feature_from_name(f.get<std::string>());
        if (!feature) fail(Errc::InvalidConfig, "rule " + rule.name + ": unknown feature " + f.get<std::string>());
        rule.features.push_back(*feature);
      }
      if (rule.features.empty()) fail(Errc::InvalidConfig, "rule " + rule.name + " has no features");
      set.rules.push_back(std::move(rule));
    }
    return set;
  } catch (const json::exception& e) {
    fail(Errc::InvalidConfig, std::string("rule file: ") + e.what());
  }
}

RuleSet load_rules(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::InvalidConfig, "cannot open rule file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_rules(buf.str());
}

bool feature_matches(const SourceFeatures& f, Feature feature, const RuleTarget& t) {
  switch (feature) {
    case Feature::Scid:
      return f.scid_scheme_match && *f.scid_scheme_match == t.scid_scheme;
    case Feature::Coalescence:
      return f.coalescence == t.coalescence;
    case Feature::InterArrival: {
      if (!f.rto_signature) return false;
      const auto& r = *f.rto_signature;
      return std::abs(r.initial_rto - t.rto.initial_rto) <= t.rto_tolerance * t.rto.initial_rto &&
             std::abs(r.backoff_base - t.rto.backoff_base) <= t.backoff_tolerance * t.rto.backoff_base &&
             r.retransmissions_max >= t.rto.retransmissions_min && r.retransmissions_min <= t.rto.retransmissions_max;
    }
    case Feature::PacketLength:
      return std::any_of(f.length_signature.begin(), f.length_signature.end(),
                         [&](const LengthKey& k) { return t.lengths.count(k) > 0; });
    case Feature::LowHostId:
      return f.low_host_id.value_or(false);
  }
  return false;
}

std::string classify(const SourceFeatures& features, const Rule& rule, const RuleTarget& target) {
  for (auto feature : rule.features)
    if (!feature_matches(features, feature, target)) return std::string(kNotOperator);
  return target.label;
}

std::string classify(const SourceFeatures& features, const RuleSet& rules, std::string_view rule_name) {
  return classify(features, rules.find(rule_name), rules.target);
}

GroundTruth parse_truth(std::istream& in) {
  GroundTruth truth;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    auto fields = split(text, '\t');
    auto ip = fields.size() == 2 ? Ipv4Address::parse(trim(fields[0])) : std::nullopt;
    if (!ip || trim(fields[1]).empty()) fail(Errc::InvalidConfig, "truth line " + std::to_string(lineno) + " malformed");
    std::string label(trim(fields[1]));
    auto [it, fresh] = truth.emplace(*ip, label);
    if (!fresh && it->second != label) fail(Errc::InvalidConfig, "conflicting labels for " + ip->to_string());
  }
  return truth;
}

GroundTruth load_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::InvalidConfig, "cannot open truth file " + path.string());
  return parse_truth(in);
}

EvalMetrics metrics_from_counts(uint64_t tp, uint64_t fp, uint64_t tn, uint64_t fn) {
  auto ratio = [](uint64_t num, uint64_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  EvalMetrics m;
  m.tp = tp;
  m.fp = fp;
  m.tn = tn;
  m.fn = fn;
  m.tpr = ratio(tp, tp + fn);
  m.fnr = ratio(fn, tp + fn);
  m.fpr = ratio(fp, fp + tn);
  m.tnr = ratio(tn, fp + tn);
  m.precision = ratio(tp, tp + fp);
  m.recall = m.tpr;
  return m;
}

EvalMetrics evaluate(std::span<const std::pair<Ipv4Address, std::string>> predictions, const GroundTruth& truth,
                     const std::string& positive_label) {
  uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (const auto& [ip, predicted] : predictions) {
    auto it = truth.find(ip);
    if (it == truth.end()) fail(Errc::MissingLabel, "no truth label for " + ip.to_string());
    bool actual = it->second == positive_label;
    bool said = predicted == positive_label;
    tp += actual && said;
    fn += actual && !said;
    fp += !actual && said;
    tn += !actual && !said;
  }
  return metrics_from_counts(tp, fp, tn, fn);
}

}  // namespace quicscatter::offnet
