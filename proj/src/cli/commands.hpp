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
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "quicscatter/cli/table.hpp"

namespace quicscatter::cli {

struct GlobalOptions {
  uint64_t seed = 1;
  bool seed_given = false;
  std::string config;
  std::string out_dir = ".";
  TableFormat format = TableFormat::Tsv;
};

// Collects a run's files in memory; nothing touches the output directory
// until commit(), so failed runs leave no partial output.
class RunOutputs {
 public:
  RunOutputs(const GlobalOptions& global, std::string subcommand);

  void table(const std::string& stem, const Table& t);
  void file(const std::string& name, std::string bytes);
  void config(const std::string& path) { configs_.push_back(path); }
  void input(const std::string& path) { inputs_.push_back(path); }
  void seed(uint64_t value) { seed_ = value; }

  // Writes every file plus <subcommand>.manifest.json.
  void commit();

 private:
  const GlobalOptions& global_;
  std::string subcommand_;
  std::optional<uint64_t> seed_;
  std::vector<std::string> configs_;
  std::vector<std::string> inputs_;
  std::vector<std::pair<std::string, std::string>> files_;
};

struct SimulateArgs {
  std::string deployment;
};

struct IngestArgs {
  std::string capture;
  std::string prefixes;
  std::string scanners;
  std::string versions;
  double idle_gap = 60.0;
  bool allow_greased = false;
  bool allow_unknown = false;
};

struct FingerprintArgs {
  std::string sessions;
  std::string datagrams;
  std::string profiles;
  std::string client_dcids;
  std::string versions;
  size_t min_sessions = 30;
  uint64_t min_samples = 500;
};

struct ScidArgs {
  std::string sessions;
  std::string client_dcids;
  double alpha = 0.001;
  uint64_t min_samples = 500;
};

struct ClassifyArgs {
  std::string sessions;
  std::string datagrams;
  std::string truth;
  std::string rules;
  std::vector<std::string> rule_names;
  std::vector<std::string> hypergiants = {"Cloudflare", "Facebook", "Google"};
};

struct ProbeArgs {
  std::string campaign;
  std::string deployment;
  std::string transport = "simulator";
  std::string initial_template;
  std::optional<size_t> handshakes;
};

struct ReportArgs {
  std::string in_dir;
};

int cmd_simulate(const GlobalOptions& g, const SimulateArgs& a, std::ostream& out, std::ostream& err);
int cmd_ingest(const GlobalOptions& g, const IngestArgs& a, std::ostream& out, std::ostream& err);
int cmd_fingerprint(const GlobalOptions& g, const FingerprintArgs& a, std::ostream& out, std::ostream& err);
int cmd_scid(const GlobalOptions& g, const ScidArgs& a, std::ostream& out, std::ostream& err);
int cmd_classify(const GlobalOptions& g, const ClassifyArgs& a, std::ostream& out, std::ostream& err);
int cmd_probe(const GlobalOptions& g, const ProbeArgs& a, std::ostream& out, std::ostream& err);
int cmd_report(const GlobalOptions& g, const ReportArgs& a, std::ostream& out, std::ostream& err);

}  // namespace quicscatter::cli
