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
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>

namespace quicscatter::wire {

// Known QUIC versions and their report labels. Loaded from a text file with
// one "hex_version<TAB>label" line per entry; '#' starts a comment.
class VersionRegistry {
 public:
  static constexpr std::string_view kOthers = "others";

  VersionRegistry() = default;

  // QUICv1, Facebook mvfst 2 and draft-29.
  static VersionRegistry defaults();
  static VersionRegistry load(const std::filesystem::path& path);
  static VersionRegistry parse(std::istream& in);

  void add(uint32_t version, std::string label) { labels_[version] = std::move(label); }
  std::optional<std::string> lookup(uint32_t version) const;
  // Registry label, or "others" for unknown versions.
  std::string label(uint32_t version) const;
  bool contains(uint32_t version) const { return labels_.contains(version); }
  const std::map<uint32_t, std::string>& entries() const { return labels_; }

 private:
  std::map<uint32_t, std::string> labels_;
};

// Reserved 0x?a?a?a?a versions used to exercise version negotiation.
constexpr bool is_greased_version(uint32_t version) { return (version & 0x0f0f0f0fu) == 0x0a0a0a0au; }

struct PlausibilityPolicy {
  bool allow_greased = false;
  bool allow_unknown = false;
};

// True when the payload holds at least one parseable long-header packet whose
// version is 0, registered, or permitted by the policy.
bool is_plausible_quic(std::span<const uint8_t> payload, const VersionRegistry& registry,
                       const PlausibilityPolicy& policy = {});

}  // namespace quicscatter::wire
