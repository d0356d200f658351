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

#include "quicscatter/wire/varint.hpp"

#include <cassert>

namespace quicscatter::wire {

std::optional<VarintRead> read_varint(std::span<const uint8_t> in) {
  if (in.empty()) return std::nullopt;
  size_t length = size_t{1} << (in[0] >> 6);
  if (in.size() < length) return std::nullopt;
  uint64_t value = in[0] & 0x3f;
  for (size_t i = 1; i < length; ++i) value = value << 8 | in[i];
  return VarintRead{value, length};
}

size_t varint_size(uint64_t value) {
  if (value < 64) return 1;
  if (value < 16384) return 2;
  if (value < (uint64_t{1} << 30)) return 4;
  return 8;
}

void append_varint(std::vector<uint8_t>& out, uint64_t value) {
  assert(value <= kMaxVarint);
  size_t length = varint_size(value);
  uint8_t prefix = length == 1 ? 0x00 : length == 2 ? 0x40 : length == 4 ? 0x80 : 0xc0;
  for (size_t i = 0; i < length; ++i) {
    auto byte = static_cast<uint8_t>(value >> (8 * (length - 1 - i)));
    out.push_back(i == 0 ? static_cast<uint8_t>(byte | prefix) : byte);
  }
}

}  // namespace quicscatter::wire
