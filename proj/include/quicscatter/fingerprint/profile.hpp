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

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "quicscatter/fingerprint/rto.hpp"
#include "quicscatter/fingerprint/statistics.hpp"
#include "quicscatter/scid/scheme.hpp"

namespace quicscatter::fingerprint {

// One operator's QUIC stack configuration as seen in backscatter.
struct FingerprintProfile {
  std::string operator_label;
  RtoEstimate rto;
  bool coalescence = false;
  bool server_chosen_ids = false;
  bool structured_scids = false;

  bool operator==(const FingerprintProfile&) const = default;
};

// JSON array of {"operator", "initial_rto", "backoff_base", "retransmissions": [min, max],
// "coalescence", "server_chosen_ids", "structured_scids"}.
std::vector<FingerprintProfile> load_profiles(const std::filesystem::path& path);
std::vector<FingerprintProfile> parse_profiles(const std::string& json_text);

// Cloudflare, Facebook and Google as measured from telescope backscatter.
std::vector<FingerprintProfile> default_profiles();

inline constexpr double kRtoMatchTolerance = 0.25;

// Coalescence and structured_scids must agree exactly and the initial RTO be
// within `tolerance` (relative to the known profile). Closest RTO wins.
std::optional<std::string> match_profile(const FingerprintProfile& observed, std::span<const FingerprintProfile> known,
                                         double tolerance = kRtoMatchTolerance);

struct FingerprintConfig {
  RtoConfig rto;
  scid::SchemeConfig scheme;
  // Table-level coalescence flag: shares as low as a few percent still mark
  // an implementation that coalesces.
  double coalescence_min_share = 0.01;
};

struct OperatorFingerprint {
  FingerprintProfile profile;
  scid::ScidScheme scheme;
  double coalesced_share = 0.0;
  size_t scid_count = 0;
};

// Client SCID (the response's DCID) -> the DCID that client originally chose.
using ClientDcidPairs = std::unordered_map<wire::ConnectionId, wire::ConnectionId>;

// Assembles an observed profile from one operator's response sessions and
// datagrams. SCIDs are de-duplicated in first-seen order; when `pairs` is
// given only sessions with a known client DCID take part in scheme detection.
// Propagates InsufficientData / InsufficientSamples / MixedLengths.
OperatorFingerprint fingerprint_operator(const std::string& operator_label,
                                         std::span<const telescope::Session> sessions,
                                         std::span<const telescope::DatagramSummary> datagrams,
                                         const ClientDcidPairs* pairs = nullptr, const FingerprintConfig& config = {});

}  // namespace quicscatter::fingerprint
