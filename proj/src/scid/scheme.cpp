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

#include "quicscatter/scid/scheme.hpp"

#include <algorithm>

#include "quicscatter/common/error.hpp"

namespace quicscatter::scid {

std::string_view scheme_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Random: return "Random";
    case SchemeKind::Structured: return "Structured";
    case SchemeKind::EchoOfClientDcid: return "EchoOfClientDcid";
  }
  return "?";
}

double echo_share(std::span<const wire::ConnectionId> scids, std::span<const wire::ConnectionId> client_dcids,
                  size_t prefix) {
  if (scids.size() != client_dcids.size()) {
    fail(Errc::InvalidConfig, "client DCIDs must pair one-to-one with SCIDs");
  }
  if (scids.empty()) return 0.0;
  size_t echoed = 0;
  for (size_t i = 0; i < scids.size(); ++i) {
    const auto& s = scids[i];
    const auto& d = client_dcids[i];
    if (s.size() >= prefix && d.size() >= prefix &&
        std::equal(s.bytes().begin(), s.bytes().begin() + static_cast<ptrdiff_t>(prefix), d.bytes().begin())) {
      ++echoed;
    }
  }
  return static_cast<double>(echoed) / static_cast<double>(scids.size());
}

ScidScheme classify_scheme(std::span<const wire::ConnectionId> scids,
                           std::optional<std::span<const wire::ConnectionId>> client_dcids,
                           const SchemeConfig& config) {
  if (client_dcids && !scids.empty() &&
      echo_share(scids, *client_dcids, config.echo_prefix) >= config.echo_min_share) {
    return {SchemeKind::EchoOfClientDcid, {}};
  }
  auto matrix = nybble_frequencies(scids);
  ScidScheme scheme;
  for (const auto& v : uniformity_test(matrix, config.uniformity)) {
    if (v.verdict == Uniformity::Skewed) scheme.flagged_positions.push_back(v.position);
  }
  scheme.kind = scheme.flagged_positions.empty() ? SchemeKind::Random : SchemeKind::Structured;
  return scheme;
}

}  // namespace quicscatter::scid
