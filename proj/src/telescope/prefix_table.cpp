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

#include "quicscatter/telescope/prefix_table.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "quicscatter/common/error.hpp"
#include "quicscatter/common/text.hpp"

namespace quicscatter::telescope {

namespace {

std::string line_error(std::string_view what, int line_no) {
  return std::string(what) + " at line " + std::to_string(line_no);
}

}  // namespace

void PrefixTable::add(Ipv4Prefix prefix, AsInfo info) {
  auto& slot = by_length_[static_cast<size_t>(prefix.length)];
  auto [it, inserted] = slot.try_emplace(prefix.network.value(), info);
  if (inserted) {
    ++count_;
  } else if (info < it->second) {
    it->second = std::move(info);
  }
}

std::optional<AsInfo> PrefixTable::lookup(Ipv4Address ip) const {
  for (int length = 32; length >= 0; --length) {
    const auto& slot = by_length_[static_cast<size_t>(length)];
    if (slot.empty()) continue;
    uint32_t mask = length == 0 ? 0u : ~uint32_t{0} << (32 - length);
    auto it = slot.find(ip.value() & mask);
    if (it != slot.end()) return it->second;
  }
  return std::nullopt;
}

std::vector<std::pair<Ipv4Prefix, AsInfo>> PrefixTable::entries() const {
  std::vector<std::pair<Ipv4Prefix, AsInfo>> out;
  for (int length = 0; length <= 32; ++length) {
    for (const auto& [network, info] : by_length_[static_cast<size_t>(length)]) {
      out.emplace_back(Ipv4Prefix{Ipv4Address(network), length}, info);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

PrefixTable PrefixTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::InvalidConfig, "cannot open prefix table " + path.string());
  return parse(in);
}

PrefixTable PrefixTable::parse(std::istream& in) {
  PrefixTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    auto fields = split(text, '\t');
    if (fields.size() < 2 || fields.size() > 3) fail(Errc::InvalidConfig, line_error("prefix table: expected 3 fields", line_no));
    auto prefix = Ipv4Prefix::parse(trim(fields[0]));
    if (!prefix) fail(Errc::InvalidConfig, line_error("prefix table: bad prefix", line_no));
    auto asn_text = trim(fields[1]);
    if (asn_text.starts_with("AS") || asn_text.starts_with("as")) asn_text.remove_prefix(2);
    uint32_t asn = 0;
    auto [ptr, ec] = std::from_chars(asn_text.data(), asn_text.data() + asn_text.size(), asn);
    if (ec != std::errc{} || ptr != asn_text.data() + asn_text.size()) {
      fail(Errc::InvalidConfig, line_error("prefix table: bad AS number", line_no));
    }
    std::string label = fields.size() == 3 ? std::string(trim(fields[2])) : "AS" + std::to_string(asn);
    table.add(*prefix, AsInfo{asn, std::move(label)});
  }
  return table;
}

void ScannerList::add(Ipv4Prefix prefix) {
  if (by_length_[static_cast<size_t>(prefix.length)].insert(prefix.network.value()).second) ++count_;
}

bool ScannerList::contains(Ipv4Address ip) const {
  for (int length = 32; length >= 0; --length) {
    const auto& slot = by_length_[static_cast<size_t>(length)];
    if (slot.empty()) continue;
    uint32_t mask = length == 0 ? 0u : ~uint32_t{0} << (32 - length);
    if (slot.contains(ip.value() & mask)) return true;
  }
  return false;
}

ScannerList ScannerList::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::InvalidConfig, "cannot open scanner list " + path.string());
  return parse(in);
}

ScannerList ScannerList::parse(std::istream& in) {
  ScannerList list;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto text = trim(line);
    if (auto hash = text.find('#'); hash != std::string_view::npos) text = trim(text.substr(0, hash));
    if (text.empty()) continue;
    auto prefix = Ipv4Prefix::parse(text);
    if (!prefix) fail(Errc::InvalidConfig, line_error("scanner list: bad prefix", line_no));
    list.add(*prefix);
  }
  return list;
}

}  // namespace quicscatter::telescope
