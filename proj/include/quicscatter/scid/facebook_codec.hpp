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

#include "quicscatter/wire/connection_id.hpp"

namespace quicscatter::scid {

// Fields mvfst packs into its 8-octet server connection IDs.
//
// Bit b of the SCID is bit (7 - b % 8) of octet b / 8, i.e. bit 0 is the
// most significant bit of the first octet.
//
//   version 1: version 0-1, host 2-17 (16 bits),  worker 18-25, process 26, random 27-63
//   version 2: version 0-1, host 8-31 (24 bits),  worker 32-39, process 40, random 2-7 and 41-63
struct FacebookScidFields {
  uint8_t scid_version = 1;
  uint32_t host_id = 0;
  uint8_t worker_id = 0;
  uint8_t process_id = 0;

  bool operator==(const FacebookScidFields&) const = default;
};

inline constexpr size_t kFacebookScidLength = 8;

constexpr int facebook_host_id_bits(uint8_t scid_version) { return scid_version == 2 ? 24 : 16; }
// Number of opaque bits left after the fields: 37 for v1, 29 for v2.
constexpr int facebook_random_bits(uint8_t scid_version) { return scid_version == 2 ? 29 : 37; }

// Version 2 selects the v2 layout, any other version the v1 layout. Only the
// low facebook_random_bits() of `random_bits` are used, high bits first.
// Throws Error(FieldOverflow) when a field exceeds its width.
wire::ConnectionId encode_facebook_scid(const FacebookScidFields& fields, uint64_t random_bits);

// Throws Error(BadLength) unless 8 octets, Error(UnknownScidVersion) unless
// the version bits are 1 or 2.
FacebookScidFields decode_facebook_scid(const wire::ConnectionId& scid);

// Off-net heuristic: the 9 most significant bits of a v1 host ID are zero.
// Always false for other versions.
constexpr bool low_host_id_predicate(const FacebookScidFields& f) {
  return f.scid_version == 1 && (f.host_id >> (facebook_host_id_bits(1) - 9)) == 0;
}

}  // namespace quicscatter::scid
