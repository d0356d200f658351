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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "quicscatter/wire/connection_id.hpp"

namespace quicscatter::scid {

// Per-position counts of the 16 nybble values over a population of equally
// long SCIDs. Position 0 is the high nybble of octet 0.
class NybbleFrequencyMatrix {
 public:
  NybbleFrequencyMatrix() = default;
  explicit NybbleFrequencyMatrix(size_t octets) : counts_(octets * 2) {}

  size_t positions() const { return counts_.size(); }
  uint64_t total() const { return total_; }
  uint64_t count(size_t position, unsigned value) const { return counts_[position][value]; }
  double relative(size_t position, unsigned value) const;
  const std::array<uint64_t, 16>& row(size_t position) const { return counts_[position]; }

  // Throws Error(MixedLengths) if the SCID length differs from the matrix width.
  void add(const wire::ConnectionId& scid);
  // Shard merge; widths must agree (an empty matrix adopts the other's width).
  void merge(const NybbleFrequencyMatrix& other);

 private:
  std::vector<std::array<uint64_t, 16>> counts_;
  uint64_t total_ = 0;
};

// Throws Error(MixedLengths) when the SCIDs are not all the same length.
NybbleFrequencyMatrix nybble_frequencies(std::span<const wire::ConnectionId> scids);

enum class Uniformity { Uniform, Skewed };

struct PositionVerdict {
  size_t position = 0;
  double chi_square = 0.0;
  double p_value = 1.0;
  Uniformity verdict = Uniformity::Uniform;
};

struct UniformityConfig {
  double alpha = 0.001;
  uint64_t min_samples = 500;
};

// Pearson chi-square against 1/16 per position, Bonferroni-corrected across
// positions. Throws Error(InsufficientSamples) below config.min_samples.
std::vector<PositionVerdict> uniformity_test(const NybbleFrequencyMatrix& m, const UniformityConfig& config = {});

// Unique SCIDs per (operator, length).
using ScidLengthStats = std::map<std::string, std::map<size_t, uint64_t>>;

struct LabeledScid {
  std::string operator_label;
  wire::ConnectionId scid;
};

ScidLengthStats scid_length_stats(std::span<const LabeledScid> scids);

// Every SCID is 20 octets and starts with 0x01. False for an empty population.
bool detect_cloudflare_signature(std::span<const wire::ConnectionId> scids);

}  // namespace quicscatter::scid
