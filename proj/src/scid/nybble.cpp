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

#include "quicscatter/scid/nybble.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <set>

#include "quicscatter/common/error.hpp"

namespace quicscatter::scid {

double NybbleFrequencyMatrix::relative(size_t position, unsigned value) const {
  return total_ == 0 ? 0.0 : static_cast<double>(counts_[position][value]) / static_cast<double>(total_);
}

void NybbleFrequencyMatrix::add(const wire::ConnectionId& scid) {
  if (scid.size() * 2 != counts_.size()) {
    fail(Errc::MixedLengths, "SCID of " + std::to_string(scid.size()) + " octets in a " +
                                 std::to_string(counts_.size() / 2) + "-octet population");
  }
  for (size_t i = 0; i < scid.size(); ++i) {
    ++counts_[2 * i][scid[i] >> 4];
    ++counts_[2 * i + 1][scid[i] & 0x0f];
  }
  ++total_;
}

void NybbleFrequencyMatrix::merge(const NybbleFrequencyMatrix& other) {
  if (other.total_ == 0 && other.counts_.empty()) return;
  if (total_ == 0 && counts_.empty()) {
    *this = other;
    return;
  }
  if (other.counts_.size() != counts_.size()) fail(Errc::MixedLengths, "merging matrices of different widths");
  for (size_t p = 0; p < counts_.size(); ++p) {
    for (size_t v = 0; v < 16; ++v) counts_[p][v] += other.counts_[p][v];
  }
  total_ += other.total_;
}

NybbleFrequencyMatrix nybble_frequencies(std::span<const wire::ConnectionId> scids) {
  if (scids.empty()) return {};
  NybbleFrequencyMatrix m(scids.front().size());
  for (const auto& s : scids) m.add(s);
  return m;
}

std::vector<PositionVerdict> uniformity_test(const NybbleFrequencyMatrix& m, const UniformityConfig& config) {
  if (m.total() < config.min_samples) {
    fail(Errc::InsufficientSamples,
         std::to_string(m.total()) + " SCIDs, need at least " + std::to_string(config.min_samples));
  }
  const boost::math::chi_squared dist(15.0);
  const double expected = static_cast<double>(m.total()) / 16.0;
  const double threshold = config.alpha / static_cast<double>(m.positions());

  std::vector<PositionVerdict> verdicts;
  verdicts.reserve(m.positions());
  for (size_t p = 0; p < m.positions(); ++p) {
    double stat = 0.0;
    for (uint64_t observed : m.row(p)) {
      double diff = static_cast<double>(observed) - expected;
      stat += diff * diff / expected;
    }
    double p_value = boost::math::cdf(boost::math::complement(dist, stat));
    verdicts.push_back({p, stat, p_value, p_value < threshold ? Uniformity::Skewed : Uniformity::Uniform});
  }
  return verdicts;
}

ScidLengthStats scid_length_stats(std::span<const LabeledScid> scids) {
  std::map<std::string, std::set<wire::ConnectionId>> unique;
  for (const auto& s : scids) unique[s.operator_label].insert(s.scid);
  ScidLengthStats stats;
  for (const auto& [label, ids] : unique) {
    for (const auto& id : ids) ++stats[label][id.size()];
  }
  return stats;
}

bool detect_cloudflare_signature(std::span<const wire::ConnectionId> scids) {
  if (scids.empty()) return false;
  for (const auto& s : scids) {
    if (s.size() != 20 || s[0] != 0x01) return false;
  }
  return true;
}

}  // namespace quicscatter::scid
