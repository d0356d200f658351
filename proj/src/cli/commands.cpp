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

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "commands.hpp"
#include "quicscatter/cli/store.hpp"
#include "quicscatter/common/error.hpp"
#include "quicscatter/common/text.hpp"
#include "quicscatter/fingerprint/profile.hpp"
#include "quicscatter/offnet/classifier.hpp"
#include "quicscatter/probe/campaign.hpp"
#include "quicscatter/scid/scheme.hpp"
#include "quicscatter/sim/scenario.hpp"
#include "quicscatter/telescope/pcap.hpp"
#include "quicscatter/telescope/prefix_table.hpp"

namespace quicscatter::cli {

namespace {

wire::VersionRegistry registry_from(const std::string& path) {
  return path.empty() ? wire::VersionRegistry::defaults() : wire::VersionRegistry::load(path);
}

Cell opt(const std::optional<double>& v) { return v ? Cell(*v) : Cell(nullptr); }

std::string join_positions(const std::vector<size_t>& positions) {
  std::string s;
  for (size_t p : positions) s += (s.empty() ? "" : ",") + std::to_string(p);
  return s;
}

std::string pct(double fraction) { return format_double(100.0 * fraction, 1); }

bool is_response(const telescope::Session& s) { return s.direction == wire::Direction::Response; }

struct OperatorData {
  std::vector<telescope::Session> sessions;  // responses only
  std::vector<telescope::DatagramSummary> datagrams;
};

std::map<std::string, OperatorData> by_operator(const std::vector<StoredSession>& sessions,
                                                const std::vector<telescope::DatagramSummary>& datagrams) {
  std::map<std::string, OperatorData> out;
  for (const auto& s : sessions)
    if (is_response(s.session)) out[s.operator_label].sessions.push_back(s.session);
  for (const auto& d : datagrams)
    if (d.direction == wire::Direction::Response) out[d.operator_label].datagrams.push_back(d);
  return out;
}

std::string retransmission_range(const fingerprint::RtoEstimate& r) {
  return std::to_string(r.retransmissions_min) + "-" + std::to_string(r.retransmissions_max);
}

}  // namespace

int cmd_simulate(const GlobalOptions& g, const SimulateArgs& a, std::ostream& out, std::ostream&) {
  std::string path = a.deployment.empty() ? g.config : a.deployment;
  if (path.empty()) fail(Errc::InvalidConfig, "simulate needs a deployment config (--config or --deployment)");
  auto cfg = sim::load_deployment(path);
  if (g.seed_given) cfg.seed = g.seed;

  RunOutputs outputs(g, "simulate");
  if (path != g.config) outputs.config(path);
  outputs.seed(cfg.seed);
  auto result = sim::run_scenario(cfg);

  std::ostringstream pcap;
  telescope::PcapWriter writer(pcap);
  for (const auto& d : result.flood.datagrams) writer.write(d);
  outputs.file("capture.pcap", pcap.str());

  std::string prefixes = "# prefix\tasn\tlabel\n";
  for (const auto& [prefix, as] : result.prefixes)
    prefixes += prefix.to_string() + "\t" + std::to_string(as.asn) + "\t" + as.label + "\n";
  outputs.file("prefixes.tsv", prefixes);

  std::string truth = "# ip\tlabel\n";
  for (const auto& [ip, label] : result.truth) truth += ip.to_string() + "\t" + label + "\n";
  outputs.file("truth.tsv", truth);
  outputs.table("client_dcids", pair_table(result.flood.client_ids));
  outputs.commit();
  out << "simulated " << result.flood.sessions << " spoofed sessions, " << result.flood.datagrams.size()
      << " datagrams\n";
  return 0;
}

int cmd_ingest(const GlobalOptions& g, const IngestArgs& a, std::ostream& out, std::ostream&) {
  RunOutputs outputs(g, "ingest");
  // Load every input first: a missing table must not leave partial output.
  auto table = telescope::PrefixTable::load(a.prefixes);
  auto scanners = a.scanners.empty() ? telescope::ScannerList{} : telescope::ScannerList::load(a.scanners);
  telescope::FilterConfig filter;
  filter.registry = registry_from(a.versions);
  filter.policy.allow_greased = a.allow_greased;
  filter.policy.allow_unknown = a.allow_unknown;
  auto ingested = telescope::ingest(a.capture, filter);
  for (const auto& p : {a.capture, a.prefixes, a.scanners, a.versions})
    if (!p.empty()) outputs.input(p);

  telescope::SanitizeCounters sanitize;
  auto records = telescope::sanitize(std::move(ingested.records), scanners, &sanitize);
  auto sessions = telescope::sessionize(records, a.idle_gap);

  std::vector<StoredSession> stored;
  stored.reserve(sessions.size());
  for (auto& s : sessions) {
    auto op = telescope::operator_of(s.key.src_ip, table);
    stored.push_back({std::move(op), std::move(s)});
  }
  std::vector<telescope::DatagramSummary> datagrams;
  datagrams.reserve(records.size());
  for (const auto& r : records) datagrams.push_back(telescope::summarize(r, telescope::operator_of(r.datagram.src_ip, table)));

  const auto& c = ingested.counters;
  Table counters({"counter", "value"});
  counters.add({"frames", c.frames});
  counters.add({"malformed", c.malformed});
  counters.add({"non_udp", c.non_udp});
  counters.add({"non_quic", c.non_quic});
  counters.add({"implausible", c.implausible});
  counters.add({"emitted", c.emitted});
  counters.add({"long_header_packets", c.long_header_packets});
  counters.add({"short_header_datagrams", c.short_header_datagrams});
  counters.add({"sanitize_inspected", sanitize.inspected});
  counters.add({"sanitize_removed", sanitize.removed});
  counters.add({"sanitize_removed_packets", sanitize.removed_packets});
  counters.add({"sanitize_removed_fraction", format_double(sanitize.removed_fraction())});
  counters.add({"sessions", stored.size()});

  outputs.table("sessions", session_table(stored));
  outputs.table("datagrams", datagram_table(datagrams));
  outputs.table("counters", counters);
  outputs.commit();
  out << c.emitted << " QUIC datagrams, " << stored.size() << " sessions, " << pct(sanitize.removed_fraction())
      << "% removed by sanitization\n";
  return 0;
}

int cmd_fingerprint(const GlobalOptions& g, const FingerprintArgs& a, std::ostream& out, std::ostream& err) {
  RunOutputs outputs(g, "fingerprint");
  auto sessions = read_sessions(a.sessions);
  auto datagrams = read_datagrams(a.datagrams);
  auto profiles = a.profiles.empty() ? fingerprint::default_profiles() : fingerprint::load_profiles(a.profiles);
  std::optional<fingerprint::ClientDcidPairs> pairs;
  if (!a.client_dcids.empty()) pairs = read_pairs(a.client_dcids);
  auto registry = registry_from(a.versions);
  for (const auto& p : {a.sessions, a.datagrams, a.profiles, a.client_dcids, a.versions})
    if (!p.empty()) outputs.input(p);

  std::vector<telescope::Session> all;
  all.reserve(sessions.size());
  for (const auto& s : sessions) all.push_back(s.session);
  auto tally = fingerprint::version_tally(all, registry);
  Table versions({"role", "version", "sessions", "percent"});
  for (const auto& [key, n] : tally.counts) {
    versions.add({std::string(fingerprint::role_name(key.first)), key.second, n,
                  pct(tally.share(key.first, key.second))});
  }

  auto groups = by_operator(sessions, datagrams);
  std::vector<telescope::DatagramSummary> responses;
  for (const auto& [op, data] : groups) responses.insert(responses.end(), data.datagrams.begin(), data.datagrams.end());

  auto type_stats = fingerprint::packet_type_stats(responses);
  Table packet_types({"operator", "category", "datagrams", "percent"});
  for (const auto& [op, cats] : type_stats.counts)
    for (const auto& [cat, n] : cats) packet_types.add({op, cat, n, format_double(type_stats.percent(op, cat), 1)});

  auto hist = fingerprint::length_histogram(responses);
  Table lengths({"operator", "rank", "packets", "length", "datagrams"});
  for (const auto& [op, keys] : hist.counts) {
    size_t rank = 0;
    for (const auto& [key, n] : hist.top(op, 7))
      lengths.add({op, ++rank, fingerprint::length_key_label(key), key.length, n});
  }

  Table resends({"operator", "resends", "sessions"});
  fingerprint::FingerprintConfig config;
  config.rto.min_sessions = a.min_sessions;
  config.scheme.uniformity.min_samples = a.min_samples;
  Table prints({"operator", "status", "initial_rto", "backoff_base", "retransmissions", "coalesced_share",
                "coalescence", "scid_scheme", "flagged_positions", "server_chosen_ids", "structured_scids",
                "scid_count", "match"});
  size_t fingerprinted = 0;
  for (const auto& [op, data] : groups) {
    if (op == telescope::kUnknownOperator || data.sessions.empty()) continue;
    for (const auto& [k, n] : fingerprint::resend_count_distribution(data.sessions)) resends.add({op, k, n});
    try {
      auto fp = fingerprint::fingerprint_operator(op, data.sessions, data.datagrams, pairs ? &*pairs : nullptr, config);
      auto match = fingerprint::match_profile(fp.profile, profiles);
      prints.add({op, "ok", format_double(fp.profile.rto.initial_rto, 3), format_double(fp.profile.rto.backoff_base, 3),
                  retransmission_range(fp.profile.rto), format_double(fp.coalesced_share, 4), fp.profile.coalescence,
                  std::string(scid::scheme_name(fp.scheme.kind)), join_positions(fp.scheme.flagged_positions),
                  fp.profile.server_chosen_ids, fp.profile.structured_scids, fp.scid_count,
                  match ? *match : std::string(telescope::kUnknownOperator)});
      ++fingerprinted;
    } catch (const Error& e) {
      if (!is_precondition_error(e.code())) throw;
      err << "fingerprint: " << op << ": " << e.what() << "\n";
      prints.add({op, std::string(errc_name(e.code())), nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr,
                  nullptr, nullptr, nullptr, nullptr});
    }
  }
  if (fingerprinted == 0) fail(Errc::InsufficientData, "no operator has enough response sessions to fingerprint");

  outputs.table("fingerprints", prints);
  outputs.table("versions", versions);
  outputs.table("packet_types", packet_types);
  outputs.table("lengths", lengths);
  outputs.table("resends", resends);
  outputs.commit();
  out << fingerprinted << " operator(s) fingerprinted\n";
  return 0;
}

int cmd_scid(const GlobalOptions& g, const ScidArgs& a, std::ostream& out, std::ostream& err) {
  RunOutputs outputs(g, "scid");
  auto sessions = read_sessions(a.sessions);
  std::optional<fingerprint::ClientDcidPairs> pairs;
  if (!a.client_dcids.empty()) pairs = read_pairs(a.client_dcids);
  for (const auto& p : {a.sessions, a.client_dcids})
    if (!p.empty()) outputs.input(p);

  // Unique response SCIDs per (operator, length), first-seen order, with the
  // client DCID when known.
  struct Population {
    std::vector<wire::ConnectionId> scids;
    std::vector<wire::ConnectionId> client_dcids;
    bool all_paired = true;
  };
  std::map<std::pair<std::string, size_t>, Population> pops;
  std::vector<scid::LabeledScid> labeled;
  std::unordered_set<wire::ConnectionId> seen;
  for (const auto& s : sessions) {
    if (!is_response(s.session) || s.session.key.scid.empty()) continue;
    if (!seen.insert(s.session.key.scid).second) continue;
    labeled.push_back({s.operator_label, s.session.key.scid});
    auto& pop = pops[{s.operator_label, s.session.key.scid.size()}];
    if (pairs) {
      auto it = pairs->find(s.session.key.dcid);
      if (it == pairs->end()) continue;
      pop.client_dcids.push_back(it->second);
    }
    pop.scids.push_back(s.session.key.scid);
  }

  Table lengths({"operator", "scid_length", "unique_scids"});
  for (const auto& [op, per] : scid::scid_length_stats(labeled))
    for (const auto& [len, n] : per) lengths.add({op, len, n});

  scid::SchemeConfig config;
  config.uniformity.alpha = a.alpha;
  config.uniformity.min_samples = a.min_samples;
  Table schemes({"operator", "scid_length", "scids", "scheme", "flagged_positions", "cloudflare_signature"});
  Table nybbles({"operator", "scid_length", "position", "nybble", "count", "relative"});
  Table uniformity({"operator", "scid_length", "position", "chi_square", "p_value", "verdict"});
  size_t analysed = 0;
  for (const auto& [key, pop] : pops) {
    const auto& [op, len] = key;
    if (pop.scids.empty()) continue;
    auto m = scid::nybble_frequencies(pop.scids);
    for (size_t p = 0; p < m.positions(); ++p)
      for (unsigned v = 0; v < 16; ++v) nybbles.add({op, len, p, v, m.count(p, v), format_double(m.relative(p, v), 6)});
    bool cf = scid::detect_cloudflare_signature(pop.scids);
    try {
      for (const auto& v : scid::uniformity_test(m, config.uniformity)) {
        char p_text[32];
        std::snprintf(p_text, sizeof p_text, "%.6e", v.p_value);
        uniformity.add({op, len, v.position, format_double(v.chi_square, 3), std::string(p_text),
                        v.verdict == scid::Uniformity::Uniform ? "uniform" : "skewed"});
      }
      std::optional<std::span<const wire::ConnectionId>> dcids;
      if (pairs) dcids = std::span<const wire::ConnectionId>(pop.client_dcids);
      auto scheme = scid::classify_scheme(pop.scids, dcids, config);
      schemes.add({op, len, pop.scids.size(), std::string(scid::scheme_name(scheme.kind)),
                   join_positions(scheme.flagged_positions), cf});
      ++analysed;
    } catch (const Error& e) {
      if (!is_precondition_error(e.code())) throw;
      err << "scid: " << op << " (" << len << " octets): " << e.what() << "\n";
      schemes.add({op, len, pop.scids.size(), std::string(errc_name(e.code())), "", cf});
    }
  }
  if (analysed == 0) fail(Errc::InsufficientSamples, "no SCID population is large enough for a uniformity test");

  outputs.table("scid_lengths", lengths);
  outputs.table("schemes", schemes);
  outputs.table("nybbles", nybbles);
  outputs.table("uniformity", uniformity);
  outputs.commit();
  out << analysed << " SCID population(s) classified\n";
  return 0;
}

int cmd_classify(const GlobalOptions& g, const ClassifyArgs& a, std::ostream& out, std::ostream&) {
  RunOutputs outputs(g, "classify");
  auto sessions = read_sessions(a.sessions);
  auto datagrams = read_datagrams(a.datagrams);
  auto rules = a.rules.empty() ? offnet::default_rules() : offnet::load_rules(a.rules);
  std::optional<offnet::GroundTruth> truth;
  if (!a.truth.empty()) truth = offnet::load_truth(a.truth);
  for (const auto& p : {a.sessions, a.datagrams, a.rules, a.truth})
    if (!p.empty()) outputs.input(p);

  std::vector<const offnet::Rule*> selected;
  if (a.rule_names.empty()) {
    for (const auto& r : rules.rules) selected.push_back(&r);
  } else {
    for (const auto& name : a.rule_names) selected.push_back(&rules.find(name));
  }

  // Candidates are sources outside the hypergiants' own address space.
  std::set<std::string> excluded(a.hypergiants.begin(), a.hypergiants.end());
  std::vector<telescope::Session> candidate_sessions;
  for (const auto& s : sessions)
    if (!excluded.count(s.operator_label)) candidate_sessions.push_back(s.session);
  std::vector<telescope::DatagramSummary> candidate_datagrams;
  for (const auto& d : datagrams)
    if (!excluded.count(d.operator_label)) candidate_datagrams.push_back(d);
  auto features = offnet::extract_features(candidate_sessions, candidate_datagrams);

  Table feature_table({"source", "scid_structured", "scid_scheme_match", "coalescence", "initial_rto", "backoff_base",
                       "retransmissions", "low_host_id", "scids", "datagrams"});
  for (const auto& f : features) {
    const auto& r = f.rto_signature;
    feature_table.add({f.source.to_string(), f.scid_structured, f.scid_scheme_match ? Cell(*f.scid_scheme_match) : Cell(nullptr),
                       f.coalescence, r ? Cell(format_double(r->initial_rto, 3)) : Cell(nullptr),
                       r ? Cell(format_double(r->backoff_base, 3)) : Cell(nullptr),
                       r ? Cell(retransmission_range(*r)) : Cell(nullptr),
                       f.low_host_id ? Cell(*f.low_host_id) : Cell(nullptr), f.scid_count, f.datagram_count});
  }

  Table predictions({"source", "rule", "label"});
  Table metrics({"rule", "title", "tp", "fp", "tn", "fn", "tpr", "fpr", "tnr", "fnr", "precision", "recall"});
  for (const auto* rule : selected) {
    std::vector<std::pair<Ipv4Address, std::string>> labels;
    for (const auto& f : features) {
      labels.emplace_back(f.source, offnet::classify(f, *rule, rules.target));
      predictions.add({f.source.to_string(), rule->name, labels.back().second});
    }
    if (truth) {
      auto m = offnet::evaluate(labels, *truth, rules.target.label);
      metrics.add({rule->name, rule->title, m.tp, m.fp, m.tn, m.fn, opt(m.tpr), opt(m.fpr), opt(m.tnr), opt(m.fnr),
                   opt(m.precision), opt(m.recall)});
    }
  }

  outputs.table("features", feature_table);
  outputs.table("predictions", predictions);
  if (truth) outputs.table("metrics", metrics);
  outputs.commit();
  out << features.size() << " candidate source(s), " << selected.size() << " rule(s)\n";
  return 0;
}

int cmd_probe(const GlobalOptions& g, const ProbeArgs& a, std::ostream& out, std::ostream& err) {
  std::string campaign_path = a.campaign.empty() ? g.config : a.campaign;
  if (campaign_path.empty()) fail(Errc::InvalidConfig, "probe needs a campaign config (--config or --campaign)");
  auto campaign = probe::load_campaign(campaign_path);
  if (a.handshakes) campaign.handshakes_per_vip = *a.handshakes;
  if (g.seed_given) {
    campaign.harvest.seed = g.seed;
    campaign.detection.seed = g.seed;
  }
  if (campaign.targets.empty()) fail(Errc::InvalidConfig, "campaign has no targets");

  RunOutputs outputs(g, "probe");
  if (campaign_path != g.config) outputs.config(campaign_path);
  outputs.seed(campaign.harvest.seed);

  std::optional<sim::Simulator> simulator;
  std::unique_ptr<probe::Transport> transport;
  if (a.transport == "simulator") {
    if (a.deployment.empty()) fail(Errc::InvalidConfig, "the simulator transport needs --deployment");
    auto deployment = sim::load_deployment(a.deployment);
    outputs.config(a.deployment);
    simulator.emplace(deployment.seed, deployment.epoch);
    sim::build_deployment(*simulator, deployment);
    transport = std::make_unique<probe::SimulatorTransport>(*simulator);
  } else if (a.transport == "udp") {
    if (a.initial_template.empty()) fail(Errc::InvalidConfig, "the udp transport needs --initial-template");
    std::ifstream in(a.initial_template, std::ios::binary);
    if (!in) fail(Errc::InvalidConfig, "cannot open " + a.initial_template);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    outputs.input(a.initial_template);
    err << "warning: probing real networks; results are meaningless for anycast targets\n";
    transport = std::make_unique<probe::UdpTransport>(std::move(bytes));
  } else {
    fail(Errc::InvalidConfig, "unknown transport " + a.transport);
  }

  auto codec = probe::facebook_host_codec();
  std::vector<probe::HostIdHarvest> harvests;
  Table summary({"vip", "attempts", "failures", "unique_host_ids"});
  Table host_ids({"vip", "host_id"});
  Table discovery({"vip", "handshakes", "fraction"});
  for (auto vip : campaign.targets) {
    auto h = probe::harvest_host_ids(vip, campaign.handshakes_per_vip, *transport, codec, campaign.harvest);
    summary.add({vip.to_string(), h.attempts, h.failures, h.unique_ids.size()});
    for (uint32_t id : h.unique_ids) host_ids.add({vip.to_string(), id});
    if (!h.observations.empty()) {
      double last = -1;
      for (const auto& [n, frac] : probe::discovery_curve(h)) {
        if (frac == last) continue;  // only points where a new ID appeared
        discovery.add({vip.to_string(), n, format_double(frac, 6)});
        last = frac;
      }
    }
    harvests.push_back(std::move(h));
  }

  auto report = probe::cluster_vips(harvests, campaign.jaccard_threshold);
  Table jaccard({"vip_a", "vip_b", "jaccard"});
  for (size_t i = 0; i < report.vips.size(); ++i)
    for (size_t j = i + 1; j < report.vips.size(); ++j)
      if (report.jaccard[i][j] > 0)
        jaccard.add({report.vips[i].to_string(), report.vips[j].to_string(), format_double(report.jaccard[i][j], 6)});
  Table clusters({"cluster", "vip"});
  for (size_t c = 0; c < report.clusters.size(); ++c)
    for (size_t m : report.clusters[c]) clusters.add({c, report.vips[m].to_string()});

  if (campaign.detect) {
    Table lb({"vip", "verdict", "fail_window", "held_host_id", "follow_up_host_id", "follow_ups"});
    auto host = [](const std::optional<uint32_t>& h) { return h ? Cell(*h) : Cell(nullptr); };
    for (auto vip : campaign.targets) {
      auto v = probe::detect_lb_type(vip, *transport, codec, campaign.detection);
      lb.add({vip.to_string(), std::string(probe::lb_type_name(v.type)),
              v.type == probe::LbType::CidAware ? Cell(format_double(v.fail_window, 3)) : Cell(nullptr),
              host(v.held_host_id), host(v.follow_up_host_id), v.follow_ups});
    }
    outputs.table("lb_type", lb);
  }

  outputs.table("harvest", summary);
  outputs.table("host_ids", host_ids);
  outputs.table("discovery", discovery);
  outputs.table("jaccard", jaccard);
  outputs.table("clusters", clusters);
  outputs.commit();
  out << campaign.targets.size() << " VIP(s) probed, " << report.clusters.size() << " cluster(s)\n";
  return 0;
}

int cmd_report(const GlobalOptions& g, const ReportArgs& a, std::ostream& out, std::ostream&) {
  namespace fs = std::filesystem;
  RunOutputs outputs(g, "report");
  fs::path in_dir(a.in_dir.empty() ? g.out_dir : a.in_dir);
  auto load = [&](const std::string& stem) -> std::vector<Record> {
    auto path = in_dir / (stem + std::string(extension(g.format)));
    if (!fs::exists(path)) return {};
    outputs.input(path.string());
    return read_table(path);
  };

  Table table1({"operator", "initial_rto", "retransmissions", "coalescence", "server_chosen_ids", "structured_scids",
                "match"});
  for (auto& r : load("fingerprints")) {
    if (r["status"] != "ok") continue;
    table1.add({r["operator"], r["initial_rto"], r["retransmissions"], r["coalescence"], r["server_chosen_ids"],
                r["structured_scids"], r["match"]});
  }

  // Version label -> (client %, server %).
  std::map<std::string, std::pair<std::string, std::string>> versions;
  for (auto& r : load("versions")) {
    auto& slot = versions[r["version"]];
    (r["role"] == "client" ? slot.first : slot.second) = r["percent"];
  }
  Table table2({"version", "client_percent", "server_percent"});
  for (const auto& [label, shares] : versions)
    table2.add({label, shares.first.empty() ? "-" : shares.first, shares.second.empty() ? "-" : shares.second});

  Table table3({"operator", "category", "percent"});
  for (auto& r : load("packet_types")) table3.add({r["operator"], r["category"], r["percent"]});

  outputs.table("table1", table1);
  outputs.table("table2", table2);
  outputs.table("table3", table3);
  outputs.commit();
  out << table1.size() << " operator row(s), " << table2.size() << " version row(s)\n";
  return 0;
}

}  // namespace quicscatter::cli
