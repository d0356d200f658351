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

#include "quicscatter/wire/version_registry.hpp"

#include <fstream>
#include <sstream>

#include "quicscatter/common/error.hpp"
#include "quicscatter/common/text.hpp"
#include "quicscatter/wire/datagram.hpp"
#include "quicscatter/wire/packet.hpp"

namespace quicscatter::wire {

std::string_view direction_name(Direction d) {
  switch (d) {
    case Direction::Request: return "request";
    case Direction::Response: return "response";
    case Direction::NonQuic: return "non-quic";
  }
  return "?";
}

VersionRegistry VersionRegistry::defaults() {
  VersionRegistry r;
  r.add(0x00000001, "QUICv1");
  r.add(0xfaceb002, "Facebook mvfst 2");
  r.add(0xff00001d, "draft-29");
  return r;
}

VersionRegistry VersionRegistry::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::InvalidConfig, "cannot open version registry " + path.string());
  return parse(in);
}

VersionRegistry VersionRegistry::parse(std::istream& in) {
  VersionRegistry r;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    auto fields = split(text, '\t');
    if (fields.size() != 2) {
      fail(Errc::InvalidConfig, "version registry line " + std::to_string(line_no) + ": expected 2 fields");
    }
    auto hex = trim(fields[0]);
    if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
    uint32_t version = 0;
    std::istringstream parse_hex{std::string(hex)};
    parse_hex >> std::hex >> version;
    if (hex.empty() || hex.size() > 8 || !parse_hex.eof() || parse_hex.fail()) {
      fail(Errc::InvalidConfig, "version registry line " + std::to_string(line_no) + ": bad version");
    }
    r.add(version, std::string(trim(fields[1])));
  }
  return r;
}

std::optional<std::string> VersionRegistry::lookup(uint32_t version) const {
  auto it = labels_.find(version);
  if (it == labels_.end()) return std::nullopt;
  return it->second;
}

std::string VersionRegistry::label(uint32_t version) const {
  return lookup(version).value_or(std::string(kOthers));
}

bool is_plausible_quic(std::span<const uint8_t> payload, const VersionRegistry& registry,
                       const PlausibilityPolicy& policy) {
  for (const auto& h : split_coalesced(payload)) {
    if (h.version == 0 || registry.contains(h.version)) return true;
    if (policy.allow_greased && is_greased_version(h.version)) return true;
    if (policy.allow_unknown) return true;
  }
  return false;
}

}  // namespace quicscatter::wire
