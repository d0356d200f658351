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

#include "quicscatter/fingerprint/rto.hpp"

#include <algorithm>
#include <cmath>

#include "quicscatter/common/error.hpp"

namespace quicscatter::fingerprint {

using wire::PacketType;

std::vector<double> send_offsets(const telescope::Session& session) {
  const bool has_initial = std::any_of(session.timeline.begin(), session.timeline.end(),
                                       [](const auto& e) { return e.type == PacketType::Initial; });
  const PacketType tracked = has_initial ? PacketType::Initial : PacketType::Handshake;
  std::vector<double> offsets;
  for (const auto& e : session.timeline) {
    if (e.type == tracked) offsets.push_back(e.offset);
  }
  if (!offsets.empty()) {
    double first = offsets.front();
    for (auto& o : offsets) o -= first;
  }
  return offsets;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<ptrdiff_t>(mid), values.end());
  double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  double lower = *std::max_element(values.begin(), values.begin() + static_cast<ptrdiff_t>(mid));
  return (lower + upper) / 2.0;
}

double percentile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  auto rank = static_cast<size_t>(std::ceil(p / 100.0 * static_cast<double>(values.size())));
  rank = std::clamp<size_t>(rank, 1, values.size());
  return values[rank - 1];
}

RtoEstimate estimate_rto(std::span<const telescope::Session> sessions, const RtoConfig& config) {
  std::vector<double> first_resends;
  std::vector<double> ratios;
  std::vector<double> counts;
  for (const auto& s : sessions) {
    auto offsets = send_offsets(s);
    if (offsets.empty()) continue;
    counts.push_back(static_cast<double>(offsets.size() - 1));
    if (static_cast<int>(offsets.size()) - 1 < config.min_resends) continue;
    first_resends.push_back(offsets[1]);
    for (size_t k = 2; k < offsets.size(); ++k) {
      double previous_gap = offsets[k - 1] - offsets[k - 2];
      if (previous_gap > 0) ratios.push_back((offsets[k] - offsets[k - 1]) / previous_gap);
    }
  }
  if (first_resends.size() < config.min_sessions) {
    fail(Errc::InsufficientData, std::to_string(first_resends.size()) + " sessions with " +
                                     std::to_string(config.min_resends) + "+ resends, need " +
                                     std::to_string(config.min_sessions));
  }
  RtoEstimate est;
  est.sample_count = first_resends.size();
  est.initial_rto = median(first_resends);
  est.backoff_base = ratios.empty() ? 1.0 : std::max(1.0, median(ratios));
  est.retransmissions_min = static_cast<int>(percentile(counts, config.low_percentile));
  est.retransmissions_max = static_cast<int>(percentile(counts, config.high_percentile));
  return est;
}

std::map<int, uint64_t> resend_count_distribution(std::span<const telescope::Session> sessions) {
  std::map<int, uint64_t> hist;
  for (const auto& s : sessions) ++hist[resend_count(s)];
  return hist;
}

}  // namespace quicscatter::fingerprint
