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
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "quicscatter/common/ip.hpp"
#include "quicscatter/fingerprint/rto.hpp"
#include "quicscatter/fingerprint/statistics.hpp"
#include "quicscatter/scid/nybble.hpp"
#include "quicscatter/telescope/ingest.hpp"
#include "quicscatter/telescope/summary.hpp"

namespace quicscatter::offnet {

inline constexpr std::string_view kNotOperator = "NotOperator";

struct SourceFeatures {
  Ipv4Address source;
  bool scid_structured = false;
  std::optional<std::string> scid_scheme_match;  // "Facebook" or "Cloudflare"
  bool coalescence = false;
  std::optional<fingerprint::RtoEstimate> rto_signature;
  std::set<fingerprint::LengthKey> length_signature;
  // Set when at least one SCID decoded as a v1 Facebook SCID: true iff all of them have low host IDs.
  std::optional<bool> low_host_id;
  size_t scid_count = 0;
  size_t datagram_count = 0;
};

struct FeatureConfig {
  fingerprint::RtoConfig rto{1, 2, 5.0, 95.0};
  scid::UniformityConfig uniformity;
  double coalescence_min_share = 0.01;
};

// One feature vector per response source address, in address order. Only
// Response sessions and datagrams are used.
std::vector<SourceFeatures> extract_features(std::span<const telescope::Session> sessions,
                                             std::span<const telescope::DatagramSummary> datagrams,
                                             const FeatureConfig& config = {});

// Features of a single source from its SCIDs (first-seen order), sessions and datagrams.
SourceFeatures source_features(Ipv4Address source, std::span<const wire::ConnectionId> scids,
                               std::span<const telescope::Session> sessions,
                               std::span<const telescope::DatagramSummary> datagrams,
                               const FeatureConfig& config = {});

enum class Feature { Scid, Coalescence, InterArrival, PacketLength, LowHostId };
std::string_view feature_name(Feature f);
std::optional<Feature> feature_from_name(std::string_view name);

// Feature values a source must show to be labelled as the target operator.
struct RuleTarget {
  std::string label = "Facebook";
  std::string scid_scheme = "Facebook";
  bool coalescence = false;
  fingerprint::RtoEstimate rto{0.4, 2.0, 7, 9, 0};
  double rto_tolerance = 0.25;      // relative, initial RTO
  double backoff_tolerance = 0.25;  // relative, backoff base
  std::set<fingerprint::LengthKey> lengths;
};

struct Rule {
  std::string name;   // e.g. "scid-offnet-low-host-id"
  std::string title;  // e.g. "SCID off-net (low host ID)"
  std::vector<Feature> features;
};

struct RuleSet {
  RuleTarget target;
  std::vector<Rule> rules;

  // By name or title. Throws Error(UnknownRule).
  const Rule& find(std::string_view name) const;
};

// Facebook target with one rule per classifier row used for off-net detection.
RuleSet default_rules();
RuleSet parse_rules(const std::string& json_text);
RuleSet load_rules(const std::filesystem::path& path);

// "Initial,Handshake:1250" <-> LengthKey.
std::string length_key_text(const fingerprint::LengthKey& key);
fingerprint::LengthKey parse_length_key(std::string_view text);

bool feature_matches(const SourceFeatures& f, Feature feature, const RuleTarget& target);
// target.label when every feature of the rule matches, kNotOperator otherwise.
std::string classify(const SourceFeatures& features, const Rule& rule, const RuleTarget& target);
std::string classify(const SourceFeatures& features, const RuleSet& rules, std::string_view rule_name);

using GroundTruth = std::unordered_map<Ipv4Address, std::string>;
// ip<TAB>label per line, '#' comments. Throws Error(InvalidConfig).
GroundTruth parse_truth(std::istream& in);
GroundTruth load_truth(const std::filesystem::path& path);

struct EvalMetrics {
  uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  // nullopt marks an undefined ratio (zero denominator).
  std::optional<double> tpr, fpr, tnr, fnr, precision, recall;
};

EvalMetrics metrics_from_counts(uint64_t tp, uint64_t fp, uint64_t tn, uint64_t fn);

// Binary evaluation for `positive_label`. Throws Error(MissingLabel) when a
// predicted source has no truth label.
EvalMetrics evaluate(std::span<const std::pair<Ipv4Address, std::string>> predictions, const GroundTruth& truth,
                     const std::string& positive_label);

}  // namespace quicscatter::offnet
