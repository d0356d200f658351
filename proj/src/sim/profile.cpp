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

#include "quicscatter/sim/profile.hpp"

#include <cmath>

#include "quicscatter/common/error.hpp"

namespace quicscatter::sim {

std::string_view scheme_kind_name(ScidSchemeKind kind) {
  switch (kind) {
    case ScidSchemeKind::FacebookV1: return "FacebookV1";
    case ScidSchemeKind::FacebookV2: return "FacebookV2";
    case ScidSchemeKind::CloudflareFixed: return "CloudflareFixed";
    case ScidSchemeKind::EchoClientDcid: return "EchoClientDcid";
    case ScidSchemeKind::UniformRandom: return "UniformRandom";
  }
  return "?";
}

std::optional<ScidSchemeKind> scheme_kind_from_name(std::string_view name) {
  for (auto k : {ScidSchemeKind::FacebookV1, ScidSchemeKind::FacebookV2, ScidSchemeKind::CloudflareFixed,
                 ScidSchemeKind::EchoClientDcid, ScidSchemeKind::UniformRandom}) {
    if (scheme_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view routing_mode_name(RoutingMode mode) {
  return mode == RoutingMode::FiveTuple ? "FiveTuple" : "CidAware";
}

std::optional<RoutingMode> routing_mode_from_name(std::string_view name) {
  if (name == "FiveTuple") return RoutingMode::FiveTuple;
  if (name == "CidAware") return RoutingMode::CidAware;
  return std::nullopt;
}

double StackProfile::resend_offset(int k) const { return initial_rto * std::pow(backoff_base, k - 1); }

void StackProfile::validate() const {
  auto bad = [this](const std::string& what) { fail(Errc::InvalidConfig, "profile " + operator_label + ": " + what); };
  if (!(initial_rto > 0)) bad("initial_rto must be positive");
  if (backoff_base < 1) bad("backoff_base must be >= 1");
  if (min_retransmissions < 0 || max_retransmissions < min_retransmissions) bad("bad retransmission range");
  if (coalesce_fraction < 0 || coalesce_fraction > 1) bad("coalesce_fraction outside [0, 1]");
  if (scid_length == 0 || scid_length > 20) bad("scid_length outside [1, 20]");
  if (padding.initial > 1472 || padding.handshake > 1472 || padding.coalesced > 1472) bad("padding above 1472 octets");
}

}  // namespace quicscatter::sim
