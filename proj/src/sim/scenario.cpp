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

#include "quicscatter/sim/scenario.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "quicscatter/common/error.hpp"
#include "quicscatter/wire/packet.hpp"

namespace quicscatter::sim {

using nlohmann::json;

std::map<std::string, StackProfile> default_stack_profiles() {
  std::map<std::string, StackProfile> out;

  StackProfile fb;
  fb.operator_label = "Facebook";
  fb.version = 0xfaceb002;
  fb.initial_rto = 0.4;
  fb.min_retransmissions = 7;
  fb.max_retransmissions = 9;
  fb.scid_scheme = ScidSchemeKind::FacebookV1;
  fb.padding = {1232, 1232, 1232, 120};
  out[fb.operator_label] = fb;

  StackProfile cf;
  cf.operator_label = "Cloudflare";
  cf.initial_rto = 1.0;
  cf.min_retransmissions = 3;
  cf.max_retransmissions = 6;
  cf.coalesce_fraction = 0.064;
  cf.scid_scheme = ScidSchemeKind::CloudflareFixed;
  cf.padding = {1200, 1200, 1200, 150};
  out[cf.operator_label] = cf;

  StackProfile g;
  g.operator_label = "Google";
  g.initial_rto = 0.3;
  g.min_retransmissions = 3;
  g.max_retransmissions = 6;
  g.coalesce_fraction = 0.69;
  g.scid_scheme = ScidSchemeKind::EchoClientDcid;
  g.padding = {1250, 1250, 1250, 100};
  out[g.operator_label] = g;

  StackProfile generic;
  generic.operator_label = "Generic";
  generic.initial_rto = 0.5;
  generic.min_retransmissions = 0;
  generic.max_retransmissions = 2;
  generic.scid_scheme = ScidSchemeKind::UniformRandom;
  generic.padding = {1200, 1200, 1200, 120};
  out[generic.operator_label] = generic;
  return out;
}

namespace {

uint32_t parse_version(const json& j) {
  if (j.is_number_unsigned()) return j.get<uint32_t>();
  auto text = j.get<std::string>();
  return static_cast<uint32_t>(std::stoul(text, nullptr, 16));
}

StackProfile profile_from_json(const std::string& name, const json& j, const StackProfile* base) {
  StackProfile p = base ? *base : StackProfile{};
  p.operator_label = j.value("operator", name);
  if (j.contains("version")) p.version = parse_version(j.at("version"));
  p.initial_rto = j.value("initial_rto", p.initial_rto);
  p.backoff_base = j.value("backoff_base", p.backoff_base);
  if (j.contains("retransmissions")) {
    p.min_retransmissions = j.at("retransmissions").at(0).get<int>();
    p.max_retransmissions = j.at("retransmissions").at(1).get<int>();
  }
  if (j.contains("max_retransmissions")) {
    p.max_retransmissions = j.at("max_retransmissions").get<int>();
    if (!j.contains("retransmissions")) p.min_retransmissions = p.max_retransmissions;
  }
  p.coalesce_fraction = j.value("coalesce_fraction", p.coalesce_fraction);
  if (j.contains("scid_scheme")) {
    auto kind = scheme_kind_from_name(j.at("scid_scheme").get<std::string>());
    if (!kind) fail(Errc::InvalidConfig, "profile " + name + ": unknown scid_scheme");
    p.scid_scheme = *kind;
  }
  p.scid_length = j.value("scid_length", p.scid_length);
  if (j.contains("padding")) {
    const auto& pad = j.at("padding");
    p.padding.initial = pad.value("initial", p.padding.initial);
    p.padding.handshake = pad.value("handshake", p.padding.handshake);
    p.padding.coalesced = pad.value("coalesced", p.padding.coalesced);
    p.padding.coalesced_initial_payload = pad.value("coalesced_initial_payload", p.padding.coalesced_initial_payload);
  }
  p.validate();
  return p;
}

std::vector<Ipv4Address> vips_from_json(const json& j) {
  std::vector<Ipv4Address> out;
  if (j.is_array()) {
    for (const auto& v : j) out.push_back(Ipv4Address::from_string(v.get<std::string>()));
    return out;
  }
  auto base = Ipv4Address::from_string(j.at("base").get<std::string>());
  auto count = j.at("count").get<uint32_t>();
  for (uint32_t i = 0; i < count; ++i) out.emplace_back(base.value() + i);
  return out;
}

ClusterSpec cluster_from_json(const json& j) {
  ClusterSpec s;
  auto& c = s.cluster;
  c.name = j.at("name").get<std::string>();
  c.vips = vips_from_json(j.at("vips"));
  c.l7lb_count = j.value("l7lbs", size_t{0});
  c.host_id_base = j.value("host_id_base", uint32_t{1});
  if (j.contains("host_ids")) c.host_ids = j.at("host_ids").get<std::vector<uint32_t>>();
  if (c.host_ids.empty() && c.l7lb_count == 0) c.l7lb_count = 1;
  c.workers = j.value("workers", c.workers);
  if (j.contains("routing")) {
    auto mode = routing_mode_from_name(j.at("routing").get<std::string>());
    if (!mode) fail(Errc::InvalidConfig, "cluster " + c.name + ": unknown routing mode");
    c.routing_mode = *mode;
  }
  c.state_lifetime = j.value("state_lifetime", c.state_lifetime);
  s.profile = j.at("profile").get<std::string>();
  s.origin.asn = j.value("asn", uint32_t{0});
  s.origin.label = j.value("as_label", s.profile);
  s.truth_label = j.value("truth", s.profile);
  s.flood_sessions = j.value("flood_sessions", size_t{0});
  return s;
}

}  // namespace

DeploymentConfig parse_deployment(const std::string& json_text) {
  try {
    auto doc = json::parse(json_text);
    DeploymentConfig cfg;
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.epoch = doc.value("epoch", cfg.epoch);
    cfg.duration = doc.value("duration", cfg.duration);
    cfg.attack_window = doc.value("attack_window", cfg.attack_window);
    cfg.ack_probability = doc.value("ack_probability", cfg.ack_probability);
    if (doc.contains("telescope")) cfg.telescope = Ipv4Prefix::from_string(doc.at("telescope").get<std::string>());
    cfg.profiles = default_stack_profiles();
    if (doc.contains("profiles")) {
      for (const auto& [name, body] : doc.at("profiles").items()) {
        auto it = cfg.profiles.find(name);
        cfg.profiles[name] = profile_from_json(name, body, it == cfg.profiles.end() ? nullptr : &it->second);
      }
    }
    for (const auto& c : doc.value("clusters", json::array())) {
      auto entry = cluster_from_json(c);
      if (!cfg.profiles.count(entry.profile)) fail(Errc::InvalidConfig, "cluster " + entry.cluster.name + ": unknown profile " + entry.profile);
      cfg.clusters.push_back(std::move(entry));
    }
    for (const auto& t : doc.value("client_traffic", json::array())) {
      ClientTrafficSpec entry;
      entry.sources = Ipv4Prefix::from_string(t.at("sources").get<std::string>());
      entry.datagrams = t.at("datagrams").get<size_t>();
      if (t.contains("version")) entry.version = parse_version(t.at("version"));
      entry.length = t.value("length", entry.length);
      cfg.client_traffic.push_back(entry);
    }
    if (!(cfg.duration > 0)) fail(Errc::InvalidConfig, "duration must be positive");
    if (cfg.attack_window < 0 || cfg.ack_probability < 0 || cfg.ack_probability > 1)
      fail(Errc::InvalidConfig, "attack_window or ack_probability out of range");
    return cfg;
  } catch (const json::exception& e) {
    fail(Errc::InvalidConfig, std::string("deployment file: ") + e.what());
  } catch (const std::logic_error& e) {
    fail(Errc::InvalidConfig, std::string("deployment file: ") + e.what());
  }
}

DeploymentConfig load_deployment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::InvalidConfig, "cannot open deployment file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_deployment(buf.str());
}

void build_deployment(Simulator& sim, const DeploymentConfig& config) {
  for (const auto& entry : config.clusters) {
    sim.add_cluster(build_cluster(entry.cluster, config.profiles.at(entry.profile)));
  }
}

ScenarioOutput run_scenario(const DeploymentConfig& config) {
  Simulator sim(config.seed, config.epoch);
  build_deployment(sim, config);
  ScenarioOutput out;
  sim.set_sink([&out](const wire::Datagram& d) { out.flood.datagrams.push_back(d); });

  FloodOptions options;
  options.ack_probability = config.ack_probability;
  options.epoch = config.epoch;
  auto& rng = sim.rng();
  auto start_time = [&] { return config.attack_window > 0 ? rng.unit() * config.attack_window : 0.0; };

  for (size_t ci = 0; ci < config.clusters.size(); ++ci) {
    const auto& entry = config.clusters[ci];
    for (auto vip : entry.cluster.vips) {
      out.prefixes.emplace_back(Ipv4Prefix{vip, 32}, entry.origin);
      out.truth.emplace_back(vip, entry.truth_label);
    }
    for (size_t s = 0; s < entry.flood_sessions; ++s) {
      auto source = config.telescope.at(rng.below(config.telescope.size()));
      double start = start_time();
      if (start < config.duration) schedule_spoofed_session(sim, ci, source, start, options, out.flood);
    }
  }

  for (const auto& traffic : config.client_traffic) {
    for (size_t i = 0; i < traffic.datagrams; ++i) {
      wire::Datagram d;
      d.src_ip = traffic.sources.at(rng.below(traffic.sources.size()));
      d.dst_ip = config.telescope.at(rng.below(config.telescope.size()));
      d.src_port = static_cast<uint16_t>(rng.between(1024, 65535));
      d.dst_port = wire::kQuicPort;
      wire::LongHeader h;
      h.version = traffic.version;
      std::array<uint8_t, 8> dcid{}, scid{};
      rng.fill(dcid);
      rng.fill(scid);
      h.dcid = wire::ConnectionId(dcid);
      h.scid = wire::ConnectionId(scid);
      d.payload = padded_packet(h, traffic.length, rng);
      double at = start_time();
      if (at >= config.duration) continue;
      sim.clock().schedule_at(at, [&sim, d, at, epoch = config.epoch]() mutable {
        d.timestamp = epoch + at;
        sim.emit(d);
      });
    }
  }

  sim.clock().run_before(config.duration);
  return out;
}

}  // namespace quicscatter::sim
