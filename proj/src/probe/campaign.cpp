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

#include "quicscatter/probe/campaign.hpp"

#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "quicscatter/common/error.hpp"
#include "quicscatter/common/rng.hpp"
#include "quicscatter/scid/facebook_codec.hpp"

namespace quicscatter::probe {

std::string_view port_strategy_name(PortStrategy s) {
  return s == PortStrategy::DecreasingFromMax ? "DecreasingFromMax" : "RandomSeeded";
}

std::optional<PortStrategy> port_strategy_from_name(std::string_view name) {
  if (name == "DecreasingFromMax") return PortStrategy::DecreasingFromMax;
  if (name == "RandomSeeded") return PortStrategy::RandomSeeded;
  return std::nullopt;
}

HostIdCodec facebook_host_codec() {
  return [](const wire::ConnectionId& cid) -> std::optional<uint32_t> {
    if (cid.size() != scid::kFacebookScidLength) return std::nullopt;
    try {
      return scid::decode_facebook_scid(cid).host_id;
    } catch (const Error&) {
      return std::nullopt;
    }
  };
}

namespace {

wire::ConnectionId random_cid(Rng& rng) {
  std::array<uint8_t, 8> b{};
  rng.fill(b);
  return wire::ConnectionId(b);
}

class PortSequence {
 public:
  PortSequence(PortStrategy strategy, uint16_t start, uint16_t min, Rng& rng)
      : strategy_(strategy), start_(start), min_(min), next_(start), rng_(rng) {}

  uint16_t next() {
    if (strategy_ == PortStrategy::RandomSeeded) return static_cast<uint16_t>(rng_.between(min_, start_));
    uint16_t port = next_;
    next_ = next_ <= min_ ? start_ : static_cast<uint16_t>(next_ - 1);
    return port;
  }

 private:
  PortStrategy strategy_;
  uint16_t start_, min_, next_;
  Rng& rng_;
};

}  // namespace

HostIdHarvest harvest_host_ids(Ipv4Address vip, size_t n, Transport& transport, const HostIdCodec& codec,
                               const HarvestOptions& options) {
  if (n == 0) fail(Errc::InvalidConfig, "handshakes_per_vip must be at least 1");
  if (options.min_port > options.start_port) fail(Errc::InvalidConfig, "port range is empty");
  Rng rng(options.seed);
  PortSequence ports(options.port_strategy, options.start_port, options.min_port, rng);
  HostIdHarvest h;
  h.vip = vip;
  for (size_t i = 0; i < n; ++i) {
    if (i > 0 && options.inter_probe_gap > 0) transport.wait(options.inter_probe_gap);
    HandshakeRequest req{vip, ports.next(), random_cid(rng), random_cid(rng)};
    auto result = transport.handshake(req);
    ++h.attempts;
    std::optional<uint32_t> host;
    if (result.completed) {
      host = codec(*result.server_cid);
      transport.close(req, *result.server_cid);
    }
    if (host) {
      h.observations.emplace_back(i, *host);
      h.unique_ids.insert(*host);
    } else {
      ++h.failures;
    }
    if (h.attempts >= options.failure_grace &&
        static_cast<double>(h.failures) > options.max_failure_rate * static_cast<double>(h.attempts)) {
      fail(Errc::HarvestAborted, "harvest of " + vip.to_string() + " aborted after " + std::to_string(h.failures) +
                                     " failures in " + std::to_string(h.attempts) + " handshakes");
    }
  }
  return h;
}

std::vector<std::pair<size_t, double>> discovery_curve(const HostIdHarvest& harvest) {
  if (harvest.observations.empty()) fail(Errc::EmptyHarvest, "no host IDs harvested from " + harvest.vip.to_string());
  std::set<uint32_t> seen;
  const double total = static_cast<double>(harvest.unique_ids.size());
  std::vector<std::pair<size_t, double>> curve;
  curve.reserve(harvest.observations.size());
  for (const auto& [index, host] : harvest.observations) {
    seen.insert(host);
    curve.emplace_back(index + 1, static_cast<double>(seen.size()) / total);
  }
  return curve;
}

double jaccard(const std::set<uint32_t>& a, const std::set<uint32_t>& b) {
  if (a.empty() && b.empty()) return 0.0;
  size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

ClusterReport cluster_vips(std::span<const HostIdHarvest> harvests, double threshold) {
  const size_t n = harvests.size();
  ClusterReport report;
  report.jaccard.assign(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) {
    report.vips.push_back(harvests[i].vip);
    report.jaccard[i][i] = 1.0;
  }

  // Only VIP pairs sharing an ID can have J > 0.
  std::unordered_map<uint32_t, std::vector<size_t>> holders;
  for (size_t i = 0; i < n; ++i)
    for (uint32_t id : harvests[i].unique_ids) holders[id].push_back(i);
  std::map<std::pair<size_t, size_t>, size_t> common;
  for (const auto& [id, list] : holders)
    for (size_t a = 0; a < list.size(); ++a)
      for (size_t b = a + 1; b < list.size(); ++b) ++common[{list[a], list[b]}];

  std::vector<size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [pair, c] : common) {
    auto [i, j] = pair;
    double uni = static_cast<double>(harvests[i].unique_ids.size() + harvests[j].unique_ids.size() - c);
    double jv = static_cast<double>(c) / uni;
    report.jaccard[i][j] = report.jaccard[j][i] = jv;
    if (jv >= threshold) {
      auto ri = find(i), rj = find(j);
      if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
    }
  }

  std::map<size_t, size_t> slot;  // root -> cluster index, ordered by first member
  for (size_t i = 0; i < n; ++i) {
    auto root = find(i);
    auto [it, fresh] = slot.emplace(root, report.clusters.size());
    if (fresh) report.clusters.emplace_back();
    report.clusters[it->second].push_back(i);
  }
  return report;
}

std::string_view lb_type_name(LbType t) {
  switch (t) {
    case LbType::CidAware: return "CidAware";
    case LbType::FiveTuple: return "FiveTuple";
    case LbType::Inconclusive: return "Inconclusive";
  }
  return "?";
}

LbTypeVerdict detect_lb_type(Ipv4Address vip, Transport& transport, const HostIdCodec& codec,
                             const DetectOptions& options) {
  if (!transport.chooses_client_ids())
    fail(Errc::Unsupported, "transport cannot send Initials with a chosen DCID");
  if (!(options.probe_interval > 0) || options.max_wait < options.probe_interval)
    fail(Errc::InvalidConfig, "probe_interval must be positive and not above max_wait");
  Rng rng(options.seed);
  uint16_t port = options.start_port;
  auto next_port = [&] { return port > 1024 ? port-- : (port = options.start_port); };

  HandshakeRequest held{vip, next_port(), random_cid(rng), random_cid(rng)};
  auto first = transport.handshake(held);
  if (!first.completed) fail(Errc::TransportUnavailable, "initial handshake with " + vip.to_string() + " failed");
  const double t0 = transport.now();
  const auto s1 = *first.server_cid;

  LbTypeVerdict verdict;
  verdict.held_host_id = codec(s1);
  bool failed_before = false;
  while (transport.now() - t0 + options.probe_interval <= options.max_wait) {
    transport.wait(options.probe_interval);
    HandshakeRequest follow{vip, next_port(), s1, random_cid(rng)};
    auto r = transport.handshake(follow);
    ++verdict.follow_ups;
    if (!r.completed) {
      failed_before = true;
      continue;
    }
    transport.close(follow, *r.server_cid);
    verdict.follow_up_host_id = codec(*r.server_cid);
    double window = transport.now() - t0;
    if (failed_before && window >= options.min_fail_window) {
      verdict.type = LbType::CidAware;
      verdict.fail_window = window;
    } else {
      verdict.type = LbType::FiveTuple;
    }
    break;
  }
  transport.close(held, s1);
  return verdict;
}

namespace {

using nlohmann::json;

std::vector<Ipv4Address> targets_from_json(const json& j) {
  std::vector<Ipv4Address> out;
  if (j.is_array()) {
    for (const auto& v : j) out.push_back(Ipv4Address::from_string(v.get<std::string>()));
  } else {
    auto base = Ipv4Address::from_string(j.at("base").get<std::string>());
    for (uint32_t i = 0; i < j.at("count").get<uint32_t>(); ++i) out.emplace_back(base.value() + i);
  }
  return out;
}

}  // namespace

ProbeCampaign parse_campaign(const std::string& json_text) {
  try {
    auto doc = json::parse(json_text);
    ProbeCampaign c;
    if (doc.contains("targets")) c.targets = targets_from_json(doc.at("targets"));
    c.handshakes_per_vip = doc.value("handshakes_per_vip", c.handshakes_per_vip);
    if (doc.contains("port_strategy")) {
      auto s = port_strategy_from_name(doc.at("port_strategy").get<std::string>());
      if (!s) fail(Errc::InvalidConfig, "unknown port_strategy");
      c.harvest.port_strategy = *s;
    }
    c.harvest.start_port = doc.value("start_port", c.harvest.start_port);
    c.harvest.inter_probe_gap = doc.value("inter_probe_gap", c.harvest.inter_probe_gap);
    c.harvest.seed = doc.value("seed", c.harvest.seed);
    c.detection.seed = c.harvest.seed;
    c.detection.start_port = c.harvest.start_port;
    c.jaccard_threshold = doc.value("jaccard_threshold", c.jaccard_threshold);
    c.detect = doc.value("detect_lb_type", c.detect);
    c.detection.probe_interval = doc.value("probe_interval", c.detection.probe_interval);
    c.detection.max_wait = doc.value("max_wait", c.detection.max_wait);
    if (c.handshakes_per_vip < 1) fail(Errc::InvalidConfig, "handshakes_per_vip must be at least 1");
    if (c.jaccard_threshold < 0 || c.jaccard_threshold > 1) fail(Errc::InvalidConfig, "jaccard_threshold outside [0, 1]");
    return c;
  } catch (const json::exception& e) {
    fail(Errc::InvalidConfig, std::string("campaign file: ") + e.what());
  }
}

ProbeCampaign load_campaign(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::InvalidConfig, "cannot open campaign file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_campaign(buf.str());
}

}  // namespace quicscatter::probe
