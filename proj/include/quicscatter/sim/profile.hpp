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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace quicscatter::sim {

enum class ScidSchemeKind { FacebookV1, FacebookV2, CloudflareFixed, EchoClientDcid, UniformRandom };
enum class RoutingMode { FiveTuple, CidAware };

std::string_view scheme_kind_name(ScidSchemeKind kind);
std::optional<ScidSchemeKind> scheme_kind_from_name(std::string_view name);
std::string_view routing_mode_name(RoutingMode mode);
std::optional<RoutingMode> routing_mode_from_name(std::string_view name);

// Target UDP payload lengths for server datagrams.
struct PaddingPolicy {
  uint32_t initial = 1200;
  uint32_t handshake = 1200;
  uint32_t coalesced = 1200;
  uint32_t coalesced_initial_payload = 120;  // Initial share of a coalesced datagram
};

struct StackProfile {
  std::string operator_label;
  uint32_t version = 1;
  double initial_rto = 0.3;
  double backoff_base = 2.0;
  // Resend rounds per connection are drawn uniformly from [min, max].
  int min_retransmissions = 0;
  int max_retransmissions = 0;
  // Probability that a round goes out as one coalesced datagram; 0 disables coalescence.
  double coalesce_fraction = 0.0;
  ScidSchemeKind scid_scheme = ScidSchemeKind::UniformRandom;
  size_t scid_length = 8;  // UniformRandom only
  PaddingPolicy padding;

  bool coalescence() const { return coalesce_fraction > 0.0; }
  // Offset of resend round k (k >= 1) after the first response.
  double resend_offset(int k) const;
  // Throws Error(InvalidConfig) when an invariant does not hold.
  void validate() const;
};

}  // namespace quicscatter::sim
