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
#include <map>
#include <span>
#include <vector>

#include "quicscatter/telescope/ingest.hpp"

namespace quicscatter::fingerprint {

struct RtoEstimate {
  double initial_rto = 0.0;    // seconds
  double backoff_base = 1.0;
  int retransmissions_min = 0;
  int retransmissions_max = 0;
  uint64_t sample_count = 0;

  bool operator==(const RtoEstimate&) const = default;
};

struct RtoConfig {
  uint64_t min_sessions = 30;
  int min_resends = 2;
  double low_percentile = 5.0;
  double high_percentile = 95.0;
};

// Offsets of every send of the session's Initial (Handshake when no Initial
// was seen), relative to the first one. Element 0 is the original send.
std::vector<double> send_offsets(const telescope::Session& session);

inline int resend_count(const telescope::Session& session) {
  auto n = send_offsets(session).size();
  return n == 0 ? 0 : static_cast<int>(n) - 1;
}

// Median first-resend offset, median ratio of consecutive resend gaps and the
// percentile range of resend counts. Throws Error(InsufficientData) when fewer
// than min_sessions sessions have min_resends resends.
RtoEstimate estimate_rto(std::span<const telescope::Session> sessions, const RtoConfig& config = {});

// Resend count -> number of sessions.
std::map<int, uint64_t> resend_count_distribution(std::span<const telescope::Session> sessions);

double median(std::vector<double> values);
// Nearest-rank percentile of a non-empty sample.
double percentile(std::vector<double> values, double p);

}  // namespace quicscatter::fingerprint
