/* Copyright 2026-present sfusim contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "sfu/cli/commands.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sfu/cli/rewrite_bench.hpp"
#include "sfu/planner/capacity.hpp"
#include "sfu/sim/meeting.hpp"
#include "sfu/util/log.hpp"
#include "sfu/wire/classify.hpp"

namespace sfu::cli {

namespace {

int cmd_capacity(const std::string& mode_arg, planner::CapacityParams params,
                 std::optional<std::pair<uint64_t, uint64_t>> sweep, std::ostream& out) {
  std::vector<planner::Mode> modes;
  if (mode_arg == "all") {
    modes = {planner::Mode::nra, planner::Mode::ra_r, planner::Mode::ra_sr,
             planner::Mode::two_party};
  } else {
    auto m = planner::mode_from_name(mode_arg);
    if (!m.has_value()) {
      return 2;
    }
    modes = {*m};
  }
  out << "mode,participants,max_meetings\n";
  for (planner::Mode m : modes) {
    if (sweep.has_value()) {
      for (uint64_t n = sweep->first; n <= sweep->second; ++n) {
        planner::CapacityParams p = params;
        p.participants_per_meeting = n;
        out << planner::mode_name(m) << "," << n << "," << planner::capacity(m, p) << "\n";
      }
    } else {
      out << planner::mode_name(m) << "," << params.participants_per_meeting << ","
          << planner::capacity(m, params) << "\n";
    }
  }
  return 0;
}

int cmd_simulate(const std::string& config_path, std::optional<uint64_t> seed,
                 const std::string& out_path, const std::string& csv_path, std::ostream& out,
                 std::ostream& err) {
  std::ifstream in(config_path);
  if (!in) {
    err << "cannot open config: " << config_path << "\n";
    return 1;
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    err << "config parse error: " << e.what() << "\n";
    return 1;
  }
  sim::SimConfig config;
  try {
    config = sim::SimConfig::from_json(j);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  }
  if (seed.has_value()) config.seed = *seed;

  sim::SimMetrics metrics = sim::run_meeting(config);
  std::string rendered = metrics.to_json().dump(2) + "\n";
  if (out_path.empty() || out_path == "-") {
    out << rendered;
  } else {
    std::ofstream of(out_path);
    if (!of) {
      err << "cannot write " << out_path << "\n";
      return 1;
    }
    of << rendered;
  }
  if (!csv_path.empty()) {
    std::ofstream cf(csv_path);
    if (!cf) {
      err << "cannot write " << csv_path << "\n";
      return 1;
    }
    cf << metrics.fps_csv();
  }
  return 0;
}

nlohmann::ordered_json annotate_rtp(const wire::RtpPacket& p) {
  nlohmann::ordered_json a;
  a["protocol"] = "rtp";
  a["payload_type"] = p.payload_type;
  a["seq"] = p.seq;
  a["ssrc"] = p.ssrc;
  a["marker"] = p.marker;
  a["media_kind"] = p.media_kind == wire::MediaKind::audio ? "audio" : "video";
  a["payload_len"] = p.payload_len();
  a["extensions"] = nlohmann::ordered_json::array();
  for (const auto& el : p.extensions) {
    if (el.is_padding) {
      a["extensions"].push_back({{"padding", true}});
    } else {
      a["extensions"].push_back({{"id", el.id}, {"length", el.length()}});
    }
  }
  return a;
}

nlohmann::ordered_json annotate_rtcp(const std::vector<wire::RtcpMessage>& msgs) {
  nlohmann::ordered_json a;
  a["protocol"] = "rtcp";
  a["messages"] = nlohmann::ordered_json::array();
  for (const auto& m : msgs) {
    nlohmann::ordered_json e;
    switch (m.kind) {
      case wire::RtcpKind::SR: e["kind"] = "SR"; break;
      case wire::RtcpKind::SDES: e["kind"] = "SDES"; break;
      case wire::RtcpKind::RR: e["kind"] = "RR"; break;
      case wire::RtcpKind::REMB: e["kind"] = "REMB"; break;
      case wire::RtcpKind::NACK: e["kind"] = "NACK"; break;
      case wire::RtcpKind::PLI: e["kind"] = "PLI"; break;
    }
    e["sender_ssrc"] = m.sender_ssrc;
    if (m.remb_bps.has_value()) e["remb_bps"] = *m.remb_bps;
    if (!m.nack_seqs.empty()) e["nack_seqs"] = m.nack_seqs;
    a["messages"].push_back(e);
  }
  return a;
}

nlohmann::ordered_json annotate_stun(const wire::StunMessage& m) {
  nlohmann::ordered_json a;
  a["protocol"] = "stun";
  a["kind"] = m.kind == wire::StunKind::binding_request ? "binding_request"
                                                        : "binding_response";
  a["transaction_id"] = to_hex(BytesView(m.transaction_id.data(), m.transaction_id.size()));
  if (m.xor_mapped_address.has_value()) {
    a["xor_mapped_address"] = wire::endpoint_to_string(*m.xor_mapped_address);
  }
  a["message_integrity_present"] = m.message_integrity_present;
  return a;
}

const char* route_name(wire::PlaneRoute r) {
  switch (r) {
    case wire::PlaneRoute::data_plane: return "data_plane";
    case wire::PlaneRoute::data_plane_with_copy_to_agent:
      return "data_plane_with_copy_to_agent";
    case wire::PlaneRoute::control_plane_only: return "control_plane_only";
  }
  return "?";
}

int cmd_parse(const std::string& trace_path, const std::string& out_path, std::ostream& out,
              std::ostream& err) {
  std::ifstream in(trace_path);
  if (!in) {
    err << "cannot open trace: " << trace_path << "\n";
    return 1;
  }
  std::ostringstream buffer;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::ordered_json record;
    try {
      nlohmann::json rec = nlohmann::json::parse(line);
      record["time_us"] = rec.value("time_us", int64_t(0));
      record["direction"] = rec.value("direction", "in");
      record["port"] = rec.value("port", 0);
      Bytes payload = from_hex(rec.at("hex").get<std::string>());
      wire::ClassifiedPacket cp = wire::parse_and_classify(payload);
      if (const auto* rtp = std::get_if<wire::RtpPacket>(&cp.packet)) {
        record["annotation"] = annotate_rtp(*rtp);
      } else if (const auto* rtcp = std::get_if<std::vector<wire::RtcpMessage>>(&cp.packet)) {
        record["annotation"] = annotate_rtcp(*rtcp);
      } else {
        record["annotation"] = annotate_stun(std::get<wire::StunMessage>(cp.packet));
      }
      record["route"] = route_name(cp.route);
    } catch (const std::exception& e) {
      // record-level failures annotate and move on
      record["error"] = e.what();
      record["line"] = lineno;
    }
    buffer << record.dump() << "\n";
  }
  if (out_path.empty() || out_path == "-") {
    out << buffer.str();
  } else {
    std::ofstream of(out_path);
    if (!of) {
      err << "cannot write " << out_path << "\n";
      return 1;
    }
    of << buffer.str();
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"software model of a switch-offloaded selective forwarding unit"};
  app.require_subcommand(1);

  // capacity
  auto* cap = app.add_subcommand("capacity", "replication-capacity bounds per tree design");
  std::string cap_mode = "all";
  planner::CapacityParams cap_params;
  std::string sweep_arg;
  cap->add_option("--mode", cap_mode, "nra|ra_r|ra_sr|two_party|all");
  cap->add_option("--trees", cap_params.trees, "multicast tree budget");
  cap->add_option("--meetings-per-tree", cap_params.meetings_per_tree, "meetings per tree (m)");
  cap->add_option("--qualities", cap_params.qualities, "quality tiers (q)");
  cap->add_option("--participants", cap_params.participants_per_meeting,
                  "participants per meeting (N)");
  cap->add_option("--per-stream-bps", cap_params.per_stream_bps, "per-stream bitrate");
  cap->add_option("--egress-budget-bps", cap_params.egress_budget_bps, "egress bandwidth");
  cap->add_option("--stream-table", cap_params.stream_table_bound,
                  "two-party unicast rule capacity");
  cap->add_option("--sweep-participants", sweep_arg, "range lo:hi to sweep N");

  // simulate
  auto* simc = app.add_subcommand("simulate", "run a meeting scenario");
  std::string sim_config, sim_out = "-", sim_csv;
  std::optional<uint64_t> sim_seed;
  uint64_t sim_seed_raw = 0;
  bool sim_seed_set = false;
  simc->add_option("--config", sim_config, "scenario JSON")->required();
  simc->add_option("--out", sim_out, "metrics JSON path (- for stdout)");
  simc->add_option("--csv", sim_csv, "per-window fps CSV path");
  simc->add_option("--seed", sim_seed_raw, "override scenario seed")
      ->each([&](const std::string&) { sim_seed_set = true; });

  // rewrite-bench
  auto* bench = app.add_subcommand("rewrite-bench", "sequence-rewrite overhead experiment");
  BenchParams bp;
  std::string bench_out = "-";
  bench->add_option("--heuristic", bp.heuristic, "slm|slr")
      ->check(CLI::IsMember({"slm", "slr"}));
  bench->add_option("--loss", bp.loss, "loss rate [0,1]")->check(CLI::Range(0.0, 1.0));
  bench->add_option("--reorder", bp.reorder, "reorder probability [0,1]")
      ->check(CLI::Range(0.0, 1.0));
  bench->add_option("--reorder-depth", bp.reorder_depth, "max displacement (packets)");
  bench->add_option("--packets", bp.packets, "packets per stream");
  bench->add_option("--seed", bp.seed, "first seed");
  bench->add_option("--seeds", bp.seed_count, "number of seeds");
  bench->add_option("--cadence", bp.cadence, "l2|l1l2")->check(CLI::IsMember({"l2", "l1l2"}));
  bench->add_option("--packets-per-frame", bp.packets_per_frame, "fixed frame size");
  bench->add_option("--threads", bp.threads, "worker threads for the sweep");
  bench->add_option("--out", bench_out, "CSV path (- for stdout)");

  // parse
  auto* parsec = app.add_subcommand("parse", "annotate a JSONL hex trace");
  std::string trace_path, parse_out = "-";
  parsec->add_option("trace", trace_path, "JSONL trace with hex payloads")->required();
  parsec->add_option("--out", parse_out, "annotated output path (- for stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << e.what() << "\n";
    return 2;
  }

  try {
    if (cap->parsed()) {
      std::optional<std::pair<uint64_t, uint64_t>> sweep;
      if (!sweep_arg.empty()) {
        auto colon = sweep_arg.find(':');
        if (colon == std::string::npos) {
          err << "--sweep-participants expects lo:hi\n";
          return 2;
        }
        sweep = {std::stoull(sweep_arg.substr(0, colon)),
                 std::stoull(sweep_arg.substr(colon + 1))};
      }
      int rc = cmd_capacity(cap_mode, cap_params, sweep, out);
      if (rc == 2) err << "unknown mode: " << cap_mode << "\n";
      return rc;
    }
    if (simc->parsed()) {
      if (sim_seed_set) sim_seed = sim_seed_raw;
      return cmd_simulate(sim_config, sim_seed, sim_out, sim_csv, out, err);
    }
    if (bench->parsed()) {
      auto results = run_bench(bp);
      std::string csv = bench_csv(bp.heuristic, results);
      if (bench_out.empty() || bench_out == "-") {
        out << csv;
      } else {
        std::ofstream of(bench_out);
        if (!of) {
          err << "cannot write " << bench_out << "\n";
          return 1;
        }
        of << csv;
      }
      return 0;
    }
    if (parsec->parsed()) {
      return cmd_parse(trace_path, parse_out, out, err);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace sfu::cli
