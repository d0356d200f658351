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

#include "quicscatter/cli/app.hpp"

#include <ostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "quicscatter/common/error.hpp"

namespace quicscatter::cli {

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Analyse QUIC backscatter and probe QUIC load balancers", "quicscatter"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  std::string format = "tsv";
  auto* seed_opt = app.add_option("--seed", g.seed, "RNG seed (overrides the config)");
  app.add_option("--config", g.config, "Subcommand config file")->check(CLI::ExistingFile);
  app.add_option("--out-dir", g.out_dir, "Directory for outputs")->capture_default_str();
  app.add_option("--format", format, "Table format")->check(CLI::IsMember({"tsv", "jsonl"}))->capture_default_str();

  int code = 0;
  auto dispatch = [&](auto fn, const auto& args) {
    return [&, fn, args_ptr = &args] {
      g.seed_given = seed_opt->count() > 0;
      g.format = format == "jsonl" ? TableFormat::Jsonl : TableFormat::Tsv;
      code = fn(g, *args_ptr, out, err);
    };
  };

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Replay spoofed-source floods against simulated frontends");
  s->add_option("--deployment", sim.deployment, "Deployment JSON (defaults to --config)")->check(CLI::ExistingFile);
  s->callback(dispatch(cmd_simulate, sim));

  IngestArgs ing;
  auto* i = app.add_subcommand("ingest", "Turn a telescope capture into sessions and datagram summaries");
  i->add_option("--capture", ing.capture, "pcap file")->required();
  i->add_option("--prefixes", ing.prefixes, "prefix<TAB>asn<TAB>label table")->required();
  i->add_option("--scanners", ing.scanners, "Known scanner prefixes");
  i->add_option("--versions", ing.versions, "Version registry TSV");
  i->add_option("--idle-gap", ing.idle_gap, "Seconds of silence that split a session")->check(CLI::PositiveNumber);
  i->add_flag("--allow-greased", ing.allow_greased, "Keep greased versions");
  i->add_flag("--allow-unknown", ing.allow_unknown, "Keep unregistered versions");
  i->callback(dispatch(cmd_ingest, ing));

  FingerprintArgs fp;
  auto* f = app.add_subcommand("fingerprint", "Infer per-operator stack profiles");
  f->add_option("--sessions", fp.sessions, "Sessions table")->required();
  f->add_option("--datagrams", fp.datagrams, "Datagrams table")->required();
  f->add_option("--profiles", fp.profiles, "Known profiles JSON");
  f->add_option("--client-dcids", fp.client_dcids, "client_scid/client_dcid pairs");
  f->add_option("--versions", fp.versions, "Version registry TSV");
  f->add_option("--min-sessions", fp.min_sessions, "Sessions needed for an RTO estimate");
  f->add_option("--min-samples", fp.min_samples, "SCIDs needed for a uniformity test");
  f->callback(dispatch(cmd_fingerprint, fp));

  ScidArgs sc;
  auto* c = app.add_subcommand("scid", "Nybble statistics and SCID scheme detection");
  c->add_option("--sessions", sc.sessions, "Sessions table")->required();
  c->add_option("--client-dcids", sc.client_dcids, "client_scid/client_dcid pairs");
  c->add_option("--alpha", sc.alpha, "Family-wise significance level")->check(CLI::Range(0.0, 1.0));
  c->add_option("--min-samples", sc.min_samples, "SCIDs needed per population");
  c->callback(dispatch(cmd_scid, sc));

  ClassifyArgs cl;
  auto* k = app.add_subcommand("classify", "Flag off-net servers of a target operator");
  k->add_option("--sessions", cl.sessions, "Sessions table")->required();
  k->add_option("--datagrams", cl.datagrams, "Datagrams table")->required();
  k->add_option("--truth", cl.truth, "ip<TAB>label ground truth");
  k->add_option("--rules", cl.rules, "Rule set JSON");
  k->add_option("--rule", cl.rule_names, "Rule name or title (repeatable)");
  k->add_option("--exclude", cl.hypergiants, "Operator labels that are never candidates");
  k->callback(dispatch(cmd_classify, cl));

  ProbeArgs pr;
  std::size_t handshakes = 0;
  auto* p = app.add_subcommand("probe", "Harvest host IDs and detect load-balancer type");
  p->add_option("--campaign", pr.campaign, "Campaign JSON (defaults to --config)")->check(CLI::ExistingFile);
  p->add_option("--deployment", pr.deployment, "Deployment JSON for the simulator transport");
  p->add_option("--transport", pr.transport, "simulator or udp")->check(CLI::IsMember({"simulator", "udp"}));
  p->add_option("--initial-template", pr.initial_template, "Client Initial datagram to replay (udp)");
  auto* hs = p->add_option("--handshakes", handshakes, "Handshakes per VIP")->check(CLI::PositiveNumber);
  p->callback([&, run_probe = dispatch(cmd_probe, pr)] {
    if (hs->count() > 0) pr.handshakes = handshakes;
    run_probe();
  });

  ReportArgs rep;
  auto* r = app.add_subcommand("report", "Render summary tables from earlier outputs");
  r->add_option("--in-dir", rep.in_dir, "Directory holding earlier outputs (defaults to --out-dir)");
  r->callback(dispatch(cmd_report, rep));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << errc_name(e.code()) << ": " << e.what() << "\n";
    return is_precondition_error(e.code()) ? kExitPrecondition : kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return code;
}

}  // namespace quicscatter::cli
