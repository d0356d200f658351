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

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "quicscatter/scid/nybble.hpp"

namespace quicscatter::scid {

enum class SchemeKind { Random, Structured, EchoOfClientDcid };

std::string_view scheme_name(SchemeKind kind);

struct ScidScheme {
  SchemeKind kind = SchemeKind::Random;
  std::vector<size_t> flagged_positions;  // non-empty iff Structured

  bool operator==(const ScidScheme&) const = default;
};

struct SchemeConfig {
  UniformityConfig uniformity;
  size_t echo_prefix = 8;
  double echo_min_share = 0.99;  // tolerates capture loss / mispairing
};

// Share of pairs whose SCID repeats the first echo_prefix octets of the client DCID.
double echo_share(std::span<const wire::ConnectionId> scids, std::span<const wire::ConnectionId> client_dcids,
                  size_t prefix = 8);

// client_dcids, when given, is aligned with scids. An echo verdict wins over
// the uniformity test; otherwise errors from uniformity_test propagate.
ScidScheme classify_scheme(std::span<const wire::ConnectionId> scids,
                           std::optional<std::span<const wire::ConnectionId>> client_dcids = std::nullopt,
                           const SchemeConfig& config = {});

}  // namespace quicscatter::scid
