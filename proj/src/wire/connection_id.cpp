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

#include "quicscatter/wire/connection_id.hpp"

#include <algorithm>

#include "quicscatter/common/error.hpp"
#include "quicscatter/common/text.hpp"

namespace quicscatter::wire {

ConnectionId::ConnectionId(std::span<const uint8_t> bytes) {
  if (bytes.size() > kMaxLength) {
    fail(Errc::InvalidCidLength, "connection ID of " + std::to_string(bytes.size()) + " octets");
  }
  std::copy(bytes.begin(), bytes.end(), bytes_.begin());
  length_ = static_cast<uint8_t>(bytes.size());
}

std::optional<ConnectionId> ConnectionId::from_hex(std::string_view text) {
  auto bytes = quicscatter::from_hex(text);
  if (!bytes || bytes->size() > kMaxLength) return std::nullopt;
  return ConnectionId(*bytes);
}

std::string ConnectionId::to_hex() const { return quicscatter::to_hex(bytes()); }

}  // namespace quicscatter::wire
