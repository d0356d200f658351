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

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "quicscatter/common/ip.hpp"

namespace quicscatter::telescope {

struct AsInfo {
  uint32_t asn = 0;
  std::string label;

  auto operator<=>(const AsInfo&) const = default;
};

// Longest-prefix-match table from IPv4 prefixes to AS and operator label.
// Overlapping prefixes are fine; an exact duplicate prefix keeps the smallest
// (asn, label) so results never depend on insertion order.
class PrefixTable {
 public:
  void add(Ipv4Prefix prefix, AsInfo info);
  std::optional<AsInfo> lookup(Ipv4Address ip) const;
  size_t size() const { return count_; }

  // Text file: prefix<TAB>asn<TAB>label; asn may carry an "AS" prefix.
  static PrefixTable load(const std::filesystem::path& path);
  static PrefixTable parse(std::istream& in);

  std::vector<std::pair<Ipv4Prefix, AsInfo>> entries() const;

 private:
  std::array<std::unordered_map<uint32_t, AsInfo>, 33> by_length_;
  size_t count_ = 0;
};

// Map a source address to its AS; nullopt means Unknown.
inline std::optional<AsInfo> map_to_as(Ipv4Address ip, const PrefixTable& table) { return table.lookup(ip); }

// Addresses of acknowledged scan projects: one prefix or address per line.
class ScannerList {
 public:
  void add(Ipv4Prefix prefix);
  bool contains(Ipv4Address ip) const;
  bool empty() const { return count_ == 0; }

  static ScannerList load(const std::filesystem::path& path);
  static ScannerList parse(std::istream& in);

 private:
  std::array<std::unordered_set<uint32_t>, 33> by_length_;
  size_t count_ = 0;
};

}  // namespace quicscatter::telescope
