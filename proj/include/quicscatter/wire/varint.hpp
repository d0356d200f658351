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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace quicscatter::wire {

// Variable-length integers with the 2-bit length prefix (1, 2, 4 or 8 octets).
inline constexpr uint64_t kMaxVarint = (uint64_t{1} << 62) - 1;

struct VarintRead {
  uint64_t value;
  size_t length;
};

std::optional<VarintRead> read_varint(std::span<const uint8_t> in);

// Minimal encoding; `value` must not exceed kMaxVarint.
void append_varint(std::vector<uint8_t>& out, uint64_t value);
size_t varint_size(uint64_t value);

}  // namespace quicscatter::wire
