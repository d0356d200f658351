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

#include "quicscatter/scid/facebook_codec.hpp"

#include <array>
#include <string>

#include "quicscatter/common/error.hpp"

namespace quicscatter::scid {

namespace {

struct BitField {
  int first;  // inclusive, MSB-first bit index
  int width;
};

struct Layout {
  BitField version;
  BitField host;
  BitField worker;
  BitField process;
  std::array<BitField, 2> random;  // width 0 marks an unused segment
};

constexpr Layout kV1{{0, 2}, {2, 16}, {18, 8}, {26, 1}, {{{27, 37}, {0, 0}}}};
constexpr Layout kV2{{0, 2}, {8, 24}, {32, 8}, {40, 1}, {{{2, 6}, {41, 23}}}};

constexpr uint64_t mask(int width) { return width >= 64 ? ~uint64_t{0} : (uint64_t{1} << width) - 1; }

constexpr uint64_t put(uint64_t word, BitField f, uint64_t value) {
  int shift = 64 - f.first - f.width;
  return word | (value & mask(f.width)) << shift;
}

constexpr uint64_t get(uint64_t word, BitField f) { return word >> (64 - f.first - f.width) & mask(f.width); }

void check_width(uint64_t value, int width, const char* name) {
  if (value > mask(width)) {
    fail(Errc::FieldOverflow, std::string(name) + " " + std::to_string(value) + " exceeds " +
                                  std::to_string(width) + " bits");
  }
}

}  // namespace

wire::ConnectionId encode_facebook_scid(const FacebookScidFields& fields, uint64_t random_bits) {
  const Layout& layout = fields.scid_version == 2 ? kV2 : kV1;
  check_width(fields.scid_version, layout.version.width, "scid_version");
  check_width(fields.host_id, layout.host.width, "host_id");
  check_width(fields.worker_id, layout.worker.width, "worker_id");
  check_width(fields.process_id, layout.process.width, "process_id");

  uint64_t word = 0;
  word = put(word, layout.version, fields.scid_version);
  word = put(word, layout.host, fields.host_id);
  word = put(word, layout.worker, fields.worker_id);
  word = put(word, layout.process, fields.process_id);
  int remaining = layout.random[0].width + layout.random[1].width;
  for (const auto& segment : layout.random) {
    if (segment.width == 0) continue;
    remaining -= segment.width;
    word = put(word, segment, random_bits >> remaining);
  }

  std::array<uint8_t, kFacebookScidLength> bytes{};
  for (size_t i = 0; i < bytes.size(); ++i) bytes[i] = static_cast<uint8_t>(word >> (56 - 8 * i));
  return wire::ConnectionId(bytes);
}

FacebookScidFields decode_facebook_scid(const wire::ConnectionId& scid) {
  if (scid.size() != kFacebookScidLength) {
    fail(Errc::BadLength, "Facebook SCIDs are 8 octets, got " + std::to_string(scid.size()));
  }
  uint64_t word = 0;
  for (uint8_t b : scid.bytes()) word = word << 8 | b;
  auto version = static_cast<uint8_t>(get(word, kV1.version));
  if (version != 1 && version != 2) fail(Errc::UnknownScidVersion, "version bits " + std::to_string(version));
  const Layout& layout = version == 2 ? kV2 : kV1;
  return FacebookScidFields{version, static_cast<uint32_t>(get(word, layout.host)),
                            static_cast<uint8_t>(get(word, layout.worker)),
                            static_cast<uint8_t>(get(word, layout.process))};
}

}  // namespace quicscatter::scid
