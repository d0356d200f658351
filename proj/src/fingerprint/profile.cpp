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

#include "quicscatter/fingerprint/profile.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "quicscatter/common/error.hpp"

namespace quicscatter::fingerprint {

using nlohmann::json;

namespace {

FingerprintProfile profile_from_json(const json& j) {
  FingerprintProfile p;
  p.operator_label = j.at("operator").get<std::string>();
  p.rto.initial_rto = j.at("initial_rto").get<double>();
  p.rto.backoff_base = j.value("backoff_base", 2.0);
  const auto& range = j.at("retransmissions");
  p.rto.retransmissions_min = range.at(0).get<int>();
  p.rto.retransmissions_max = range.at(1).get<int>();
  p.coalescence = j.at("coalescence").get<bool>();
  p.server_chosen_ids = j.at("server_chosen_ids").get<bool>();
  p.structured_scids = j.at("structured_scids").get<bool>();
  if (p.rto.initial_rto <= 0 || p.rto.backoff_base < 1 || p.rto.retransmissions_min > p.rto.retransmissions_max) {
    fail(Errc::InvalidConfig, "profile " + p.operator_label + " violates RTO invariants");
  }
  return p;
}

}  // namespace

std::vector<FingerprintProfile> parse_profiles(const std::string& json_text) {
  try {
    auto doc = json::parse(json_text);
    const json& list = doc.is_object() ? doc.at("profiles") : doc;
    std::vector<FingerprintProfile> out;
    for (const auto& entry : list) out.push_back(profile_from_json(entry));
    return out;
  } catch (const json::exception& e) {
    fail(Errc::InvalidConfig, std::string("profile file: ") + e.what());
  }
}

std::vector<FingerprintProfile> load_profiles(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::InvalidConfig, "cannot open profile file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_profiles(buf.str());
}

std::vector<FingerprintProfile> default_profiles() {
  return {
      {"Cloudflare", {1.0, 2.0, 3, 6, 0}, true, true, true},
      {"Facebook", {0.4, 2.0, 7, 9, 0}, false, true, true},
      {"Google", {0.3, 2.0, 3, 6, 0}, true, false, false},
  };
}

std::optional<std::string> match_profile(const FingerprintProfile& observed, std::span<const FingerprintProfile> known,
                                         double tolerance) {
  const FingerprintProfile* best = nullptr;
  double best_distance = 0.0;
  for (const auto& k : known) {
    if (k.coalescence != observed.coalescence || k.structured_scids != observed.structured_scids) continue;
    double distance = std::abs(observed.rto.initial_rto - k.rto.initial_rto) / k.rto.initial_rto;
    if (distance > tolerance) continue;
    if (!best || distance < best_distance) {
      best = &k;
      best_distance = distance;
    }
  }
  if (!best) return std::nullopt;
  return best->operator_label;
}

OperatorFingerprint fingerprint_operator(const std::string& operator_label,
                                         std::span<const telescope::Session> sessions,
                                         std::span<const telescope::DatagramSummary> datagrams,
                                         const ClientDcidPairs* pairs, const FingerprintConfig& config) {
  OperatorFingerprint out;
  out.profile.operator_label = operator_label;
  out.profile.rto = estimate_rto(sessions, config.rto);
  out.coalesced_share = coalesced_share(datagrams);
  out.profile.coalescence = out.coalesced_share >= config.coalescence_min_share;

  std::vector<wire::ConnectionId> scids;
  std::vector<wire::ConnectionId> client_dcids;
  std::unordered_set<wire::ConnectionId> seen;
  for (const auto& s : sessions) {
    if (s.direction != wire::Direction::Response || !seen.insert(s.key.scid).second) continue;
    if (pairs) {
      auto it = pairs->find(s.key.dcid);
      if (it == pairs->end()) continue;
      client_dcids.push_back(it->second);
    }
    scids.push_back(s.key.scid);
  }
  out.scid_count = scids.size();
  if (pairs) {
    out.scheme = scid::classify_scheme(scids, std::span<const wire::ConnectionId>(client_dcids), config.scheme);
  } else {
    out.scheme = scid::classify_scheme(scids, std::nullopt, config.scheme);
  }
  out.profile.structured_scids = out.scheme.kind == scid::SchemeKind::Structured;
  out.profile.server_chosen_ids = out.scheme.kind != scid::SchemeKind::EchoOfClientDcid;
  return out;
}

}  // namespace quicscatter::fingerprint
