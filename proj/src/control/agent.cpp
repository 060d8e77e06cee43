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

#include "sfu/control/agent.hpp"

#include <algorithm>

#include "sfu/util/log.hpp"

namespace sfu::control {

planner::Quality select_decode_target(planner::Quality current,
                                      const std::vector<uint64_t>& estimate_history,
                                      uint64_t new_estimate, const DecodePolicy& policy) {
  auto tier = [&](uint64_t est) {
    if (est < policy.theta_low_bps) return planner::Quality::low;
    if (est < policy.theta_high_bps) return planner::Quality::mid;
    return planner::Quality::high;
  };
  planner::Quality candidate = tier(new_estimate);
  if (uint8_t(candidate) <= uint8_t(current)) return candidate;  // downgrade immediately
  // upgrade only when the last h estimates all clear the candidate tier
  std::vector<uint64_t> window = estimate_history;
  window.push_back(new_estimate);
  if (window.size() < policy.hysteresis) return current;
  for (size_t i = window.size() - policy.hysteresis; i < window.size(); ++i) {
    if (uint8_t(tier(window[i])) < uint8_t(candidate)) return current;
  }
  return candidate;
}

Agent::Agent(MessageChannel& from_controller, planner::Deployment& deployment, AgentConfig cfg)
    : from_controller_(from_controller), deployment_(deployment), cfg_(cfg),
      feedback_(cfg.ewma_alpha) {}

void Agent::process_messages() {
  while (!from_controller_.empty()) {
    AgentMessage msg = from_controller_.pop();
    if (msg.type == "participant_joined") {
      uint32_t meeting = msg.payload.at("meeting_id").get<uint32_t>();
      uint32_t pid = msg.payload.at("participant_id").get<uint32_t>();
      uint32_t video_ssrc = msg.payload.at("video_ssrc").get<uint32_t>();
      meeting_of_sender_[pid] = meeting;
      if (video_ssrc != 0) {
        feedback::StreamId sid = feedback::make_stream_id(pid, video_ssrc);
        directory_.streams[sid].sender = pid;
        structures_.emplace(sid, std::nullopt);
      }
      // refresh receiver lists of every stream in the meeting
      for (auto& [sid, info] : directory_.streams) {
        uint32_t sender = info.sender;
        if (meeting_of_sender_[sender] != meeting) continue;
        info.receivers.clear();
        for (const auto& [other, m] : meeting_of_sender_) {
          if (m == meeting && other != sender) info.receivers.push_back(other);
        }
      }
    } else if (msg.type == "participant_left") {
      uint32_t pid = msg.payload.at("participant_id").get<uint32_t>();
      uint32_t meeting = msg.payload.at("meeting_id").get<uint32_t>();
      meeting_of_sender_.erase(pid);
      for (auto it = directory_.streams.begin(); it != directory_.streams.end();) {
        if (it->second.sender == pid) {
          structures_.erase(it->first);
          it = directory_.streams.erase(it);
        } else {
          auto& rs = it->second.receivers;
          rs.erase(std::remove(rs.begin(), rs.end(), pid), rs.end());
          ++it;
        }
      }
      for (auto it = tracks_.begin(); it != tracks_.end();) {
        if (it->first.first == pid || it->first.second == pid) {
          it = tracks_.erase(it);
        } else {
          ++it;
        }
      }
      (void)meeting;
    } else {
      log::warn("agent: unknown message type " + msg.type);
    }
  }
}

wire::StunMessage Agent::stun_respond(const wire::StunMessage& request,
                                      const wire::Endpoint& src) {
  if (request.kind != wire::StunKind::binding_request) {
    throw wire::ParseError(wire::WireError::MalformedStun, "not a binding request");
  }
  wire::StunMessage resp;
  resp.kind = wire::StunKind::binding_response;
  resp.transaction_id = request.transaction_id;
  resp.xor_mapped_address = src;
  // the attribute list mirrors what build_binding_response would emit
  wire::StunAttribute attr;
  attr.type = 0x0020;
  ByteWriter w;
  w.u8(0);
  w.u8(0x01);
  w.u16(uint16_t(src.port ^ 0x2112));
  w.u32(src.ip ^ 0x2112A442);
  attr.value = w.take();
  resp.attributes.push_back(std::move(attr));
  return resp;
}

bool Agent::ingest_dependency_descriptor(feedback::StreamId stream,
                                         const wire::Av1Descriptor& dd) {
  if (!dd.has_extended_structure || !dd.extended.has_value()) {
    throw wire::ParseError(wire::WireError::MalformedDescriptor,
                           "descriptor carries no template structure");
  }
  auto it = structures_.find(stream);
  if (it == structures_.end()) it = structures_.emplace(stream, std::nullopt).first;
  if (it->second.has_value() && *it->second == *dd.extended) {
    return false;  // unchanged structure, zero rule churn
  }
  it->second = *dd.extended;
  recompile_receiver_targets(0);
  return true;
}

std::set<uint8_t> Agent::dropped_templates(uint32_t receiver, uint32_t sender) const {
  planner::Quality level = target_of(receiver, sender);
  std::set<uint8_t> dropped;
  // find the sender's structure; fall back to the standard L1T3 table
  wire::TemplateStructure structure;
  bool have = false;
  for (const auto& [sid, st] : structures_) {
    if (uint32_t(sid >> 32) == sender && st.has_value()) {
      structure = *st;
      have = true;
      break;
    }
  }
  if (!have) {
    structure.template_to_layer = {{0, 0}, {1, 0}, {2, 1}, {3, 2}, {4, 2}};
  }
  for (const auto& [tid, layer] : structure.template_to_layer) {
    if (layer > uint8_t(level)) dropped.insert(tid);
  }
  return dropped;
}

planner::Quality Agent::target_of(uint32_t receiver, uint32_t sender) const {
  auto it = tracks_.find({receiver, sender});
  if (it == tracks_.end()) return planner::Quality::high;
  return it->second.target;
}

const std::optional<wire::TemplateStructure>& Agent::structure(
    feedback::StreamId stream) const {
  static const std::optional<wire::TemplateStructure> none;
  auto it = structures_.find(stream);
  return it == structures_.end() ? none : it->second;
}

rewrite::DropRule Agent::drop_rule_for(uint32_t receiver, uint32_t sender) const {
  rewrite::DropRule rule;
  rule.layer_cycle = cfg_.layer_cycle;
  rule.min_packets_per_frame = cfg_.min_packets_per_frame;
  planner::Quality level = target_of(receiver, sender);
  for (uint8_t layer = uint8_t(level) + 1; layer <= 2; ++layer) {
    rule.dropped_layers.insert(layer);
  }
  return rule;
}

void Agent::recompile_receiver_targets(int64_t now_us) {
  ++rule_recompilations_;
  // push per-receiver quality into the installed plans
  std::map<uint32_t, std::map<uint32_t, planner::Quality>> per_meeting;  // meeting -> receiver -> min level
  for (const auto& [key, track] : tracks_) {
    auto mit = meeting_of_sender_.find(key.first);
    if (mit == meeting_of_sender_.end()) continue;
    auto& m = per_meeting[mit->second];
    auto it = m.find(key.first);
    if (it == m.end() || uint8_t(track.target) < uint8_t(it->second)) {
      m[key.first] = track.target;
    }
  }
  for (const auto& [meeting_id, receivers] : per_meeting) {
    if (!deployment_.has_meeting(meeting_id)) continue;
    planner::MeetingPlan plan = deployment_.meeting(meeting_id);
    bool adapted = false;
    plan.receiver_quality.clear();
    for (const auto& [receiver, level] : receivers) {
      plan.receiver_quality[receiver] = planner::DecodeTarget::for_level(level);
      if (level != planner::Quality::high) adapted = true;
    }
    planner::Mode want = plan.mode;
    if (adapted && plan.participants.size() > 2 && plan.mode == planner::Mode::nra) {
      want = planner::Mode::ra_r;  // migrate once rate adaptation is needed
    }
    const planner::MeetingPlan& installed = deployment_.meeting(meeting_id);
    if (want != installed.mode || installed.receiver_quality != plan.receiver_quality) {
      plan.mode = want;
      deployment_.replan(plan);
    }
  }
  (void)now_us;
}

void Agent::on_remb(feedback::StreamId stream, uint32_t receiver, uint64_t bps,
                    int64_t now_us) {
  feedback_.update_estimate(stream, receiver, bps, now_us);
  uint32_t sender = uint32_t(stream >> 32);
  auto& track = tracks_[{receiver, sender}];
  std::vector<uint64_t> history(track.history.begin(), track.history.end());
  planner::Quality next = select_decode_target(track.target, history, bps, cfg_.policy);
  track.history.push_back(bps);
  while (track.history.size() > 16) track.history.pop_front();
  if (next != track.target) {
    target_changes_.push_back({now_us, receiver, sender, track.target, next});
    track.target = next;
    pending_reconfig_ = true;
  }
}

void Agent::apply_pending_reconfig(int64_t now_us) {
  if (!pending_reconfig_) return;
  pending_reconfig_ = false;
  recompile_receiver_targets(now_us);
}

void Agent::periodic_selection(int64_t now_us) {
  for (const auto& [sid, info] : directory_.streams) {
    try {
      feedback_.select_best(sid, now_us);
    } catch (const feedback::FeedbackError&) {
      // no estimates yet for this stream
    }
  }
}

}  // namespace sfu::control
