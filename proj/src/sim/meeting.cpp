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

#include "sfu/sim/meeting.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

#include "sfu/rewrite/rewriter.hpp"
#include "sfu/util/log.hpp"
#include "sfu/wire/classify.hpp"

namespace sfu::sim {

namespace {

wire::Endpoint participant_address(uint32_t id) {
  return {0x0A000000u | id, uint16_t(5000 + id)};
}
uint32_t video_ssrc_of(uint32_t id) { return 0x10000u + id; }
uint32_t audio_ssrc_of(uint32_t id) { return 0x20000u + id; }

struct PairKey {
  uint32_t meeting, sender, receiver;
  auto operator<=>(const PairKey&) const = default;
};

struct PairState {
  bool rewriting = false;
  rewrite::SlrState slr;
  rewrite::DropRule rule;
  planner::Quality memo_level = planner::Quality::high;
  uint64_t memo_cycle = UINT64_MAX;
  std::map<uint64_t, planner::Quality> cycle_level;

  std::vector<uint16_t> arrivals;                       // rewritten seqs, arrival order
  std::map<uint64_t, uint16_t> frame_delivered_count;   // full frame number
  std::map<uint64_t, uint16_t> frame_expected;
  std::map<uint64_t, int64_t> frame_time_us;
  uint64_t suppressed = 0, rewriter_dropped = 0, delivered = 0;
  int64_t first_target_change_us = -1;
};

struct Event {
  int64_t time_us;
  uint32_t order;  // deterministic tiebreak
  enum class Kind { uplink, selection } kind;
  uint32_t participant = 0;
  size_t packet_index = 0;  // into the participant's arrived list
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time_us != b.time_us) return a.time_us > b.time_us;
    return a.order > b.order;
  }
};

}  // namespace

uint64_t SimParticipant::capacity_at(int64_t t_us) const {
  uint64_t cap = downlink_capacity_bps;
  for (const auto& [t, bps] : capacity_steps) {
    if (t_us >= t) cap = bps;
  }
  return cap;
}

double PlaneSplit::data_packet_pct() const {
  uint64_t total = data_packets + agent_copy_packets + control_packets;
  return total == 0 ? 0.0 : 100.0 * double(data_packets) / double(total);
}

double PlaneSplit::data_byte_pct() const {
  uint64_t total = data_bytes + agent_copy_bytes + control_bytes;
  return total == 0 ? 0.0 : 100.0 * double(data_bytes) / double(total);
}

SimMetrics run_meeting(const SimConfig& config) {
  SimMetrics metrics;

  pre::Engine engine;
  planner::Deployment deployment(engine);
  control::MessageChannel channel;
  wire::Endpoint sfu_addr{0x0A0000FEu, 4000};
  control::Controller controller(channel, deployment, sfu_addr);
  control::Agent agent(channel, deployment, config.agent);

  // participant directory
  std::map<uint32_t, const SimParticipant*> participants;
  std::map<uint32_t, uint32_t> meeting_of;
  std::map<uint32_t, uint32_t> participant_of_port;
  for (const auto& m : config.meetings) {
    for (const auto& p : m.participants) {
      participants[p.id] = &p;
      meeting_of[p.id] = m.id;
      participant_of_port[participant_address(p.id).port] = p.id;
    }
  }

  // signaling: everyone joins at t=0 through the controller
  for (const auto& m : config.meetings) {
    for (const auto& p : m.participants) {
      control::SdpMessage offer;
      offer.session_id = "m" + std::to_string(m.id);
      if (p.sends_video) {
        offer.media_sections.push_back(
            {"video", video_ssrc_of(p.id), "av1", {participant_address(p.id)}});
      }
      if (p.sends_audio) {
        offer.media_sections.push_back(
            {"audio", audio_ssrc_of(p.id), "opus", {participant_address(p.id)}});
      }
      if (offer.media_sections.empty()) {
        offer.media_sections.push_back(
            {"audio", audio_ssrc_of(p.id), "opus", {participant_address(p.id)}});
      }
      controller.handle_join(m.id, p.id, offer);
    }
  }
  agent.process_messages();

  // forced replication mode, if any
  for (const auto& m : config.meetings) {
    if (m.mode == "auto" || m.participants.size() < 2) continue;
    auto mode = planner::mode_from_name(m.mode);
    if (mode.has_value() && deployment.has_meeting(m.id) &&
        deployment.meeting(m.id).mode != *mode) {
      deployment.migrate(m.id, *mode);
    }
  }

  // traffic generation and uplink channels, per participant
  struct ParticipantTraffic {
    std::vector<UplinkPacket> generated;
    std::vector<size_t> arrival_order;   // indices into generated
    std::vector<int64_t> arrival_times;  // parallel to arrival_order
    std::vector<size_t> video_index_of;  // generated idx -> dense video idx
    size_t video_count = 0;
  };
  std::map<uint32_t, ParticipantTraffic> traffic;
  for (const auto& [pid, p] : participants) {
    ParticipantTraffic t;
    uint64_t sub_seed = config.seed * 1000003ULL + pid;
    t.generated = generate_stream(config.pattern, config.duration_us, sub_seed,
                                  p->sends_video, p->sends_audio);
    t.arrival_order = apply_channel(t.generated.size(), p->uplink, sub_seed ^ 0x5eed);
    t.arrival_times.reserve(t.arrival_order.size());
    int64_t running = 0;
    for (size_t idx : t.arrival_order) {
      int64_t at = std::max(running, t.generated[idx].time_us + p->uplink.base_delay_us);
      running = at;
      t.arrival_times.push_back(at);
    }
    t.video_index_of.assign(t.generated.size(), SIZE_MAX);
    for (size_t i = 0; i < t.generated.size(); ++i) {
      if (t.generated[i].kind == UplinkKind::media_video) {
        t.video_index_of[i] = t.video_count++;
      }
    }
    traffic[pid] = std::move(t);
  }

  std::map<PairKey, PairState> pairs;
  auto pair_of = [&](uint32_t meeting, uint32_t sender, uint32_t receiver) -> PairState& {
    return pairs[{meeting, sender, receiver}];
  };

  const size_t cycle_len = config.pattern.layer_cycle.size();
  std::map<uint32_t, size_t> remb_rr;  // receiver -> round-robin cursor

  // dependency structure shipped with key frames
  wire::TemplateStructure structure;
  for (const auto& [layer, templates] : config.pattern.layer_templates) {
    for (uint8_t t : templates) structure.template_to_layer[t] = layer;
  }

  auto others_of = [&](uint32_t pid) {
    std::vector<uint32_t> others;
    uint32_t m = meeting_of[pid];
    for (const auto& [oid, op] : participants) {
      if (oid != pid && meeting_of[oid] == m) others.push_back(oid);
    }
    return others;
  };

  // event queue: uplink arrivals merged with periodic selection ticks
  std::priority_queue<Event, std::vector<Event>, EventAfter> events;
  uint32_t order = 0;
  for (const auto& [pid, t] : traffic) {
    for (size_t i = 0; i < t.arrival_order.size(); ++i) {
      events.push({t.arrival_times[i], order++, Event::Kind::uplink, pid, i});
    }
  }
  for (int64_t t = config.agent.selection_period_us; t < config.duration_us;
       t += config.agent.selection_period_us) {
    events.push({t, order++, Event::Kind::selection, 0, 0});
  }

  wire::StreamRegistry registry;

  auto classify_arrival = [&](const UplinkPacket& pkt, uint32_t sender) {
    wire::ParsedPacket parsed;
    switch (pkt.kind) {
      case UplinkKind::media_video: {
        wire::RtpPacket rtp;
        rtp.payload_type = 96;
        rtp.seq = pkt.seq;
        rtp.ssrc = video_ssrc_of(sender);
        rtp.media_kind = wire::MediaKind::video;
        rtp.extension_flag = true;
        wire::Av1Descriptor dd;
        dd.template_id = pkt.template_id;
        dd.frame_number = pkt.frame;
        dd.start_of_frame = pkt.start_of_frame;
        dd.end_of_frame = pkt.end_of_frame;
        if (pkt.carries_structure) {
          dd.has_extended_structure = true;
          dd.extended = structure;
        }
        rtp.extensions.push_back(
            wire::make_av1_extension(dd, registry.rtp_ctx.av1dd_extension_id));
        parsed = std::move(rtp);
        break;
      }
      case UplinkKind::media_audio: {
        wire::RtpPacket rtp;
        rtp.payload_type = 111;
        rtp.seq = pkt.seq;
        rtp.ssrc = audio_ssrc_of(sender);
        rtp.media_kind = wire::MediaKind::audio;
        parsed = std::move(rtp);
        break;
      }
      case UplinkKind::rtcp_sr_sdes: {
        std::vector<wire::RtcpMessage> msgs(2);
        msgs[0].kind = wire::RtcpKind::SR;
        msgs[0].sender_ssrc = video_ssrc_of(sender);
        msgs[1].kind = wire::RtcpKind::SDES;
        msgs[1].sender_ssrc = video_ssrc_of(sender);
        parsed = std::move(msgs);
        break;
      }
      case UplinkKind::rtcp_rr: {
        std::vector<wire::RtcpMessage> msgs(1);
        msgs[0].kind = wire::RtcpKind::RR;
        msgs[0].sender_ssrc = video_ssrc_of(sender);
        parsed = std::move(msgs);
        break;
      }
      case UplinkKind::rtcp_rr_remb: {
        std::vector<wire::RtcpMessage> msgs(2);
        msgs[0].kind = wire::RtcpKind::RR;
        msgs[0].sender_ssrc = video_ssrc_of(sender);
        msgs[1].kind = wire::RtcpKind::REMB;
        msgs[1].sender_ssrc = video_ssrc_of(sender);
        msgs[1].remb_bps = 1;  // placeholder; the live value is set below
        parsed = std::move(msgs);
        break;
      }
      case UplinkKind::stun: {
        wire::StunMessage stun;
        stun.kind = wire::StunKind::binding_request;
        parsed = std::move(stun);
        break;
      }
    }
    return wire::classify(parsed, registry);
  };

  auto account = [&](wire::PlaneRoute route, const UplinkPacket& pkt) {
    switch (route) {
      case wire::PlaneRoute::data_plane:
        metrics.split.data_packets++;
        metrics.split.data_bytes += pkt.size_bytes;
        break;
      case wire::PlaneRoute::data_plane_with_copy_to_agent:
        metrics.split.agent_copy_packets++;
        metrics.split.agent_copy_bytes += pkt.size_bytes;
        break;
      case wire::PlaneRoute::control_plane_only:
        metrics.split.control_packets++;
        metrics.split.control_bytes += pkt.size_bytes;
        break;
    }
    static const char* names[] = {"video", "audio", "sr_sdes", "rr", "rr_remb", "stun"};
    metrics.split.packets_by_type[names[size_t(pkt.kind)]]++;
  };

  auto process_video = [&](uint32_t sender, const UplinkPacket& pkt, int64_t now) {
    uint32_t meeting = meeting_of[sender];
    if (!deployment.has_meeting(meeting)) return;

    if (pkt.carries_structure) {
      wire::Av1Descriptor dd;
      dd.template_id = pkt.template_id;
      dd.frame_number = pkt.frame;
      dd.start_of_frame = pkt.start_of_frame;
      dd.end_of_frame = pkt.end_of_frame;
      dd.has_extended_structure = true;
      dd.extended = structure;
      agent.ingest_dependency_descriptor(
          feedback::make_stream_id(sender, video_ssrc_of(sender)), dd);
    }

    uint64_t frame_full = pkt.frame;  // generation never wraps frame numbers here
    if (pkt.start_of_frame && frame_full % cycle_len == 0) {
      agent.apply_pending_reconfig(now);
    }

    const auto& rule = deployment.video_rule(meeting, sender, pkt.template_id);
    std::set<uint32_t> replica_receivers;
    if (rule.unicast) {
      auto it = participant_of_port.find(uint16_t(rule.unicast_port));
      if (it != participant_of_port.end()) replica_receivers.insert(it->second);
    } else {
      for (const auto& rep : engine.replicate(rule.meta)) {
        auto it = participant_of_port.find(uint16_t(rep.egress_port));
        if (it != participant_of_port.end()) replica_receivers.insert(it->second);
      }
    }

    for (uint32_t receiver : others_of(sender)) {
      PairState& ps = pair_of(meeting, sender, receiver);
      uint64_t cycle = frame_full / cycle_len;
      if (ps.memo_cycle != cycle) {
        // quality switches latch at cycle boundaries so no delivered frame
        // loses a dependency mid-cycle
        ps.memo_cycle = cycle;
        ps.memo_level = agent.target_of(receiver, sender);
        ps.cycle_level[cycle] = ps.memo_level;
        rewrite::DropRule aligned;
        aligned.layer_cycle = config.agent.layer_cycle;
        aligned.min_packets_per_frame = config.agent.min_packets_per_frame;
        for (uint8_t layer = uint8_t(ps.memo_level) + 1; layer <= 2; ++layer) {
          aligned.dropped_layers.insert(layer);
        }
        ps.rule = aligned;
        if (ps.first_target_change_us < 0 && ps.memo_level != planner::Quality::high) {
          ps.first_target_change_us = now;
        }
      }
      ps.frame_expected[frame_full] = pkt.frame_packet_count;
      if (!ps.frame_time_us.count(frame_full)) ps.frame_time_us[frame_full] = pkt.time_us;

      bool structurally_delivered = replica_receivers.count(receiver) != 0;
      bool memo_entitled = pkt.layer <= uint8_t(ps.memo_level);
      if (!structurally_delivered || !memo_entitled) {
        ps.suppressed++;
        continue;
      }
      if (!ps.rewriting && ps.memo_level != planner::Quality::high) ps.rewriting = true;

      uint16_t new_seq = pkt.seq;
      if (ps.rewriting) {
        rewrite::PacketView view{pkt.seq, pkt.frame, pkt.start_of_frame, pkt.end_of_frame,
                                 false};
        rewrite::RewriteAction action = rewrite::slr_process(ps.slr, view, ps.rule);
        if (!action.forward) {
          ps.rewriter_dropped++;
          continue;
        }
        new_seq = action.new_seq;
      }
      ps.delivered++;
      ps.arrivals.push_back(new_seq);
      ps.frame_delivered_count[frame_full]++;
    }
  };

  auto process_audio = [&](uint32_t sender, const UplinkPacket&) {
    uint32_t meeting = meeting_of[sender];
    if (!deployment.has_meeting(meeting)) return;
    const auto& rule = deployment.audio_rule(meeting, sender);
    if (!rule.unicast) engine.replicate(rule.meta);
  };

  auto process_remb = [&](uint32_t origin, int64_t now) {
    auto others = others_of(origin);
    if (others.empty()) return;
    uint32_t target_sender = others[remb_rr[origin]++ % others.size()];
    uint64_t bps = participants[origin]->capacity_at(now);
    feedback::StreamId sid =
        feedback::make_stream_id(target_sender, video_ssrc_of(target_sender));

    wire::RtcpMessage remb;
    remb.kind = wire::RtcpKind::REMB;
    remb.sender_ssrc = video_ssrc_of(origin);
    remb.media_ssrc = video_ssrc_of(target_sender);
    remb.remb_bps = bps;
    feedback::RtcpRoute route =
        feedback::route_rtcp(remb, origin, agent.directory(), agent.feedback_state());
    for (uint32_t dest : route.destinations) {
      auto& fb = metrics.sender_feedback[dest];
      fb.rembs_delivered++;
      fb.rembs_by_origin[origin]++;
      fb.last_target_bps = bps;
      auto selected = agent.feedback_state().selected_receiver(sid);
      if (selected.has_value() && *selected == origin) fb.rembs_from_selected++;
    }
    agent.on_remb(sid, origin, bps, now);  // the copy the data plane always makes
  };

  auto process_sr = [&](uint32_t origin) {
    wire::RtcpMessage sr;
    sr.kind = wire::RtcpKind::SR;
    sr.sender_ssrc = video_ssrc_of(origin);
    try {
      feedback::route_rtcp(sr, origin, agent.directory(), agent.feedback_state());
    } catch (const feedback::FeedbackError&) {
      // audio-only participants have no registered video stream
    }
  };

  // main loop
  while (!events.empty()) {
    Event ev = events.top();
    events.pop();
    if (ev.kind == Event::Kind::selection) {
      agent.apply_pending_reconfig(ev.time_us);
      agent.periodic_selection(ev.time_us);
      continue;
    }
    const ParticipantTraffic& t = traffic[ev.participant];
    const UplinkPacket& pkt = t.generated[t.arrival_order[ev.packet_index]];
    wire::PlaneRoute route = classify_arrival(pkt, ev.participant);
    account(route, pkt);
    switch (pkt.kind) {
      case UplinkKind::media_video:
        process_video(ev.participant, pkt, ev.time_us);
        break;
      case UplinkKind::media_audio:
        process_audio(ev.participant, pkt);
        break;
      case UplinkKind::rtcp_rr_remb:
        process_remb(ev.participant, ev.time_us);
        break;
      case UplinkKind::rtcp_sr_sdes:
        process_sr(ev.participant);
        break;
      case UplinkKind::rtcp_rr:
        break;  // coarse reports carry no estimate; agent copy only
      case UplinkKind::stun: {
        metrics.stun_requests++;
        wire::StunMessage req;
        req.kind = wire::StunKind::binding_request;
        agent.stun_respond(req, participant_address(ev.participant));
        metrics.stun_responses++;
        break;
      }
    }
  }

  // per-pair post-processing: fps, NACKs, oracle comparison, decodability
  for (auto& [key, ps] : pairs) {
    StreamMetrics sm;
    sm.sender = key.sender;
    sm.receiver = key.receiver;
    const ParticipantTraffic& t = traffic[key.sender];
    sm.generated = t.video_count;

    // channel drops of this sender's video
    uint64_t arrived_video = 0;
    for (size_t idx : t.arrival_order) {
      if (t.generated[idx].kind == UplinkKind::media_video) arrived_video++;
    }
    sm.channel_dropped = sm.generated - arrived_video;
    sm.suppressed = ps.suppressed;
    sm.rewriter_dropped = ps.rewriter_dropped;
    sm.delivered = ps.delivered;

    // delivered frames and fps windows
    std::vector<uint64_t> delivered_frames, suppressed_frames;
    size_t n_windows = size_t(config.duration_us / config.fps_window_us);
    std::vector<uint64_t> window_counts(std::max<size_t>(n_windows, 1), 0);
    uint64_t before_count = 0;
    int64_t before_horizon =
        ps.first_target_change_us >= 0 ? ps.first_target_change_us : config.duration_us;
    for (const auto& [frame, count] : ps.frame_delivered_count) {
      if (count < ps.frame_expected[frame]) continue;
      delivered_frames.push_back(frame);
      sm.frames_delivered++;
      int64_t ft = ps.frame_time_us[frame];
      size_t w = size_t(ft / config.fps_window_us);
      if (w < window_counts.size()) window_counts[w]++;
      if (ft < before_horizon) before_count++;
    }
    for (uint64_t c : window_counts) {
      sm.fps_windows.push_back(double(c) * 1e6 / double(config.fps_window_us));
    }
    sm.fps_before_adaptation =
        before_horizon > 0 ? double(before_count) * 1e6 / double(before_horizon) : 0.0;
    sm.fps_final_window = sm.fps_windows.empty() ? 0.0 : sm.fps_windows.back();
    sm.first_target_change_us = ps.first_target_change_us;

    // suppressed frames under the cycle-aligned levels
    uint64_t total_frames = uint64_t(config.duration_us / (1'000'000 / config.pattern.fps));
    planner::Quality level = planner::Quality::high;
    for (uint64_t f = 0; f < total_frames; ++f) {
      auto it = ps.cycle_level.find(f / cycle_len);
      if (it != ps.cycle_level.end()) level = it->second;
      if (config.pattern.layer_of_frame(f) > uint8_t(level)) suppressed_frames.push_back(f);
    }
    sm.decodable = decodability_check(delivered_frames, suppressed_frames);

    // receiver NACKs vs the oracle's
    auto nacks = rewrite::receiver_nacks(ps.arrivals);
    sm.nack_count = nacks.size();
    {
      // oracle: label the sender's original video stream for this pair and
      // replay the same arrival order
      std::vector<rewrite::LabeledPacket> labeled;
      labeled.reserve(t.video_count);
      planner::Quality lvl = planner::Quality::high;
      std::vector<size_t> video_dense_of(t.generated.size(), SIZE_MAX);
      size_t dense = 0;
      for (size_t i = 0; i < t.generated.size(); ++i) {
        const UplinkPacket& up = t.generated[i];
        if (up.kind != UplinkKind::media_video) continue;
        video_dense_of[i] = dense++;
        auto it = ps.cycle_level.find(up.frame / cycle_len);
        if (it != ps.cycle_level.end()) lvl = it->second;
        rewrite::LabeledPacket lp;
        lp.seq = up.seq;
        lp.frame = up.frame;
        lp.start_of_frame = up.start_of_frame;
        lp.end_of_frame = up.end_of_frame;
        lp.disposition = up.layer > uint8_t(lvl) ? rewrite::Disposition::suppressed
                                                 : rewrite::Disposition::forwarded;
        labeled.push_back(lp);
      }
      std::vector<bool> arrived(t.video_count, false);
      for (size_t idx : t.arrival_order) {
        if (video_dense_of[idx] != SIZE_MAX) arrived[video_dense_of[idx]] = true;
      }
      for (size_t i = 0; i < labeled.size(); ++i) {
        if (!arrived[i] && labeled[i].disposition == rewrite::Disposition::forwarded) {
          labeled[i].disposition = rewrite::Disposition::lost;
        }
      }
      std::vector<uint16_t> ideal = rewrite::oracle_rewrite(labeled);
      std::vector<uint16_t> oracle_arrivals;
      for (size_t idx : t.arrival_order) {
        size_t d = video_dense_of[idx];
        if (d == SIZE_MAX) continue;
        if (labeled[d].disposition == rewrite::Disposition::forwarded) {
          oracle_arrivals.push_back(ideal[d]);
        }
      }
      auto oracle_nacks = rewrite::receiver_nacks(oracle_arrivals);
      sm.extra_nacks_vs_oracle =
          nacks.size() > oracle_nacks.size() ? nacks.size() - oracle_nacks.size() : 0;
    }

    std::ostringstream name;
    name << "m" << key.meeting << ":s" << key.sender << "->r" << key.receiver;
    metrics.streams[name.str()] = std::move(sm);
  }

  metrics.target_changes = agent.target_changes();
  metrics.selection_changes = agent.feedback_state().changes();
  return metrics;
}

SimConfig SimConfig::from_json(const nlohmann::json& j) {
  SimConfig cfg;
  cfg.duration_us = int64_t(j.value("duration_s", 10.0) * 1e6);
  cfg.seed = j.value("seed", uint64_t(1));
  cfg.fps_window_us = int64_t(j.value("fps_window_s", 2.0) * 1e6);

  std::string preset = j.contains("traffic") ? j["traffic"].value("preset", "table720p")
                                             : "table720p";
  cfg.pattern = preset == "compact" ? SvcPattern::compact() : SvcPattern::table720p();

  if (j.contains("agent")) {
    const auto& a = j["agent"];
    cfg.agent.ewma_alpha = a.value("alpha", 0.3);
    cfg.agent.selection_period_us = int64_t(a.value("selection_period_ms", 500.0) * 1000);
    cfg.agent.policy.theta_low_bps = a.value("theta_low_bps", uint64_t(500'000));
    cfg.agent.policy.theta_high_bps = a.value("theta_high_bps", uint64_t(1'500'000));
    cfg.agent.policy.hysteresis = a.value("hysteresis", 3u);
    cfg.agent.min_packets_per_frame = a.value("min_packets_per_frame", uint16_t(1));
  }
  cfg.agent.layer_cycle = cfg.pattern.layer_cycle;
  if (!j.contains("agent") || !j["agent"].contains("min_packets_per_frame")) {
    // default to the generator's own minimum so cadence attribution is sound
    uint16_t lo = std::min({cfg.pattern.packets_per_frame[0].first,
                            cfg.pattern.packets_per_frame[1].first,
                            cfg.pattern.packets_per_frame[2].first});
    cfg.agent.min_packets_per_frame = lo;
  }

  for (const auto& jm : j.at("meetings")) {
    SimMeeting m;
    m.id = jm.at("id").get<uint32_t>();
    m.mode = jm.value("mode", "auto");
    for (const auto& jp : jm.at("participants")) {
      SimParticipant p;
      p.id = jp.at("id").get<uint32_t>();
      p.sends_video = jp.value("sends_video", true);
      p.sends_audio = jp.value("sends_audio", true);
      if (jp.contains("uplink")) {
        const auto& u = jp["uplink"];
        p.uplink.loss_rate = u.value("loss", 0.0);
        p.uplink.reorder_prob = u.value("reorder", 0.0);
        p.uplink.reorder_depth = u.value("reorder_depth", 0u);
        p.uplink.base_delay_us = int64_t(u.value("delay_ms", 0.0) * 1000);
      }
      p.downlink_capacity_bps = jp.value("downlink_capacity_bps", uint64_t(5'000'000));
      if (jp.contains("capacity_steps")) {
        for (const auto& st : jp["capacity_steps"]) {
          p.capacity_steps.push_back(
              {int64_t(st.at("time_s").get<double>() * 1e6), st.at("bps").get<uint64_t>()});
        }
      }
      m.participants.push_back(std::move(p));
    }
    cfg.meetings.push_back(std::move(m));
  }
  return cfg;
}

nlohmann::ordered_json SimConfig::to_json() const {
  nlohmann::ordered_json j;
  j["duration_s"] = double(duration_us) / 1e6;
  j["seed"] = seed;
  j["meetings"] = nlohmann::ordered_json::array();
  for (const auto& m : meetings) {
    nlohmann::ordered_json jm;
    jm["id"] = m.id;
    jm["mode"] = m.mode;
    jm["participants"] = nlohmann::ordered_json::array();
    for (const auto& p : m.participants) {
      jm["participants"].push_back({{"id", p.id},
                                    {"sends_video", p.sends_video},
                                    {"sends_audio", p.sends_audio},
                                    {"downlink_capacity_bps", p.downlink_capacity_bps}});
    }
    j["meetings"].push_back(jm);
  }
  return j;
}

nlohmann::ordered_json SimMetrics::to_json() const {
  nlohmann::ordered_json j;
  uint64_t total_packets = split.data_packets + split.agent_copy_packets + split.control_packets;
  uint64_t total_bytes = split.data_bytes + split.agent_copy_bytes + split.control_bytes;
  j["plane_split"] = {
      {"data_packets", split.data_packets},
      {"agent_copy_packets", split.agent_copy_packets},
      {"control_packets", split.control_packets},
      {"total_packets", total_packets},
      {"data_packet_pct", split.data_packet_pct()},
      {"data_bytes", split.data_bytes},
      {"total_bytes", total_bytes},
      {"data_byte_pct", split.data_byte_pct()},
      {"packets_by_type", split.packets_by_type},
  };
  j["streams"] = nlohmann::ordered_json::object();
  for (const auto& [name, sm] : streams) {
    j["streams"][name] = {{"sender", sm.sender},
                          {"receiver", sm.receiver},
                          {"generated", sm.generated},
                          {"channel_dropped", sm.channel_dropped},
                          {"suppressed", sm.suppressed},
                          {"rewriter_dropped", sm.rewriter_dropped},
                          {"delivered", sm.delivered},
                          {"frames_delivered", sm.frames_delivered},
                          {"nack_count", sm.nack_count},
                          {"extra_nacks_vs_oracle", sm.extra_nacks_vs_oracle},
                          {"fps_before_adaptation", sm.fps_before_adaptation},
                          {"fps_final_window", sm.fps_final_window},
                          {"fps_windows", sm.fps_windows},
                          {"first_target_change_us", sm.first_target_change_us},
                          {"decodable", sm.decodable}};
  }
  j["sender_feedback"] = nlohmann::ordered_json::object();
  for (const auto& [sender, fb] : sender_feedback) {
    nlohmann::ordered_json origins = nlohmann::ordered_json::object();
    for (const auto& [origin, count] : fb.rembs_by_origin) {
      origins[std::to_string(origin)] = count;
    }
    j["sender_feedback"][std::to_string(sender)] = {
        {"rembs_delivered", fb.rembs_delivered},
        {"rembs_from_selected", fb.rembs_from_selected},
        {"last_target_bps", fb.last_target_bps},
        {"rembs_by_origin", origins}};
  }
  j["target_changes"] = nlohmann::ordered_json::array();
  for (const auto& tc : target_changes) {
    j["target_changes"].push_back({{"time_us", tc.time_us},
                                   {"receiver", tc.receiver},
                                   {"sender", tc.sender},
                                   {"old_level", int(tc.old_level)},
                                   {"new_level", int(tc.new_level)}});
  }
  j["selection_changes"] = nlohmann::ordered_json::array();
  for (const auto& sc : selection_changes) {
    nlohmann::ordered_json e;
    e["time_us"] = sc.time_us;
    e["stream_sender"] = uint32_t(sc.stream >> 32);
    if (sc.old_receiver.has_value()) e["old_receiver"] = *sc.old_receiver;
    e["new_receiver"] = sc.new_receiver;
    j["selection_changes"].push_back(e);
  }
  j["stun"] = {{"requests", stun_requests}, {"responses", stun_responses}};
  return j;
}

std::string SimMetrics::fps_csv() const {
  std::ostringstream os;
  os << "stream,window,fps\n";
  for (const auto& [name, sm] : streams) {
    for (size_t w = 0; w < sm.fps_windows.size(); ++w) {
      os << name << "," << w << "," << sm.fps_windows[w] << "\n";
    }
  }
  return os.str();
}

}  // namespace sfu::sim
