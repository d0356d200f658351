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

#include <filesystem>
#include <string>
#include <vector>

#include "quicscatter/cli/table.hpp"
#include "quicscatter/fingerprint/profile.hpp"
#include "quicscatter/telescope/ingest.hpp"
#include "quicscatter/telescope/summary.hpp"

namespace quicscatter::cli {

struct StoredSession {
  std::string operator_label;
  telescope::Session session;
};

// Session store columns: operator src_ip dst_ip scid dcid direction version
// start_time src_port dst_port timeline, where timeline is
// "offset/type/length/coalesced" entries joined by ';'.
Table session_table(const std::vector<StoredSession>& sessions);
std::vector<StoredSession> read_sessions(const std::filesystem::path& path);

// Datagram store columns: operator timestamp src_ip dst_ip direction length types.
Table datagram_table(const std::vector<telescope::DatagramSummary>& datagrams);
std::vector<telescope::DatagramSummary> read_datagrams(const std::filesystem::path& path);

// client_scid client_dcid.
Table pair_table(const std::vector<std::pair<wire::ConnectionId, wire::ConnectionId>>& pairs);
fingerprint::ClientDcidPairs read_pairs(const std::filesystem::path& path);

}  // namespace quicscatter::cli
