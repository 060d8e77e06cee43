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

#include "sfu/control/controller.hpp"

#include "sfu/util/log.hpp"

namespace sfu::control {

nlohmann::ordered_json SdpMessage::to_json() const {
  nlohmann::ordered_json j;
  j["session_id"] = session_id;
  j["media_sections"] = nlohmann::ordered_json::array();
  for (const auto& s : media_sections) {
    nlohmann::ordered_json cands = nlohmann::ordered_json::array();
    for (const auto& c : s.candidates) cands.push_back({{"ip", c.ip}, {"port", c.port}});
    j["media_sections"].push_back(
        {{"kind", s.kind}, {"ssrc", s.ssrc}, {"codec", s.codec}, {"candidates", cands}});
  }
  return j;
}

SdpMessage SdpMessage::from_json(const nlohmann::json& j) {
  SdpMessage m;
  m.session_id = j.value("session_id", "");
  for (const auto& s : j.at("media_sections")) {
    MediaSection sec;
    sec.kind = s.at("kind").get<std::string>();
    sec.ssrc = s.at("ssrc").get<uint32_t>();
    sec.codec = s.value("codec", "");
    for (const auto& c : s.at("candidates")) {
      sec.candidates.push_back({c.at("ip").get<uint32_t>(), c.at("port").get<uint16_t>()});
    }
    if (sec.candidates.empty()) {
      throw std::invalid_argument("media section needs at least one candidate");
    }
    m.media_sections.push_back(std::move(sec));
  }
  return m;
}

AgentMessage MessageChannel::pop() {
  if (queue_.empty()) throw std::runtime_error("message channel empty");
  AgentMessage m = std::move(queue_.front());
  queue_.pop_front();
  return m;
}

uint16_t RewriteIndexAllocator::allocate() {
  if (!free_list_.empty()) {
    uint16_t idx = free_list_.back();
    free_list_.pop_back();
    used_.insert(idx);
    return idx;
  }
  if (next_ >= capacity_) {
    throw ControlException(ControlError::IndexSpaceExhausted, "rewrite index table full");
  }
  uint16_t idx = uint16_t(next_++);
  used_.insert(idx);
  return idx;
}

void RewriteIndexAllocator::release(uint16_t index) {
  if (used_.erase(index) == 0) return;
  free_list_.push_back(index);
}

Controller::Controller(MessageChannel& to_agent, planner::Deployment& deployment,
                       wire::Endpoint sfu_address)
    : to_agent_(to_agent), deployment_(deployment), sfu_address_(sfu_address) {}

const MeetingState& Controller::meeting(uint32_t meeting_id) const {
  auto it = meetings_.find(meeting_id);
  if (it == meetings_.end()) {
    throw ControlException(ControlError::UnknownMeeting,
                           "unknown meeting " + std::to_string(meeting_id));
  }
  return it->second;
}

planner::MeetingPlan Controller::to_plan(const MeetingState& st, planner::Mode mode) const {
  planner::MeetingPlan plan;
  plan.meeting_id = st.meeting_id;
  plan.mode = mode;
  for (const auto& [id, p] : st.participants) {
    plan.participants.push_back({id, p.address.port, p.sends_video, p.sends_audio});
  }
  return plan;
}

void Controller::apply_membership_change(MeetingState& st) {
  size_t n = st.participants.size();
  planner::Mode mode = n <= 2 ? planner::Mode::two_party : planner::Mode::nra;
  if (n < 2) {
    // nothing to forward yet; tear down any installed plan
    if (deployment_.has_meeting(st.meeting_id)) deployment_.remove(st.meeting_id);
    st.mode = planner::Mode::two_party;
    return;
  }
  if (deployment_.has_meeting(st.meeting_id)) {
    planner::MeetingPlan plan = to_plan(st, mode);
    // preserve quality state across membership changes
    plan.receiver_quality = deployment_.meeting(st.meeting_id).receiver_quality;
    if (deployment_.meeting(st.meeting_id).mode == planner::Mode::ra_r && n > 2) {
      plan.mode = planner::Mode::ra_r;
    }
    deployment_.replan(plan);
    st.mode = plan.mode;
  } else {
    deployment_.plan(to_plan(st, mode));
    st.mode = mode;
  }
}

SdpMessage Controller::handle_join(uint32_t meeting_id, uint32_t participant_id,
                                   const SdpMessage& offer) {
  MeetingState& st = meetings_[meeting_id];
  st.meeting_id = meeting_id;
  if (st.participants.count(participant_id)) {
    throw ControlException(ControlError::DuplicateParticipant,
                           "participant already joined: " + std::to_string(participant_id));
  }
  if (offer.media_sections.empty() || offer.media_sections.front().candidates.empty()) {
    throw std::invalid_argument("offer carries no connection candidate");
  }

  ParticipantState p;
  p.id = participant_id;
  p.address = offer.media_sections.front().candidates.front();
  for (const auto& sec : offer.media_sections) {
    if (sec.kind == "video") {
      p.sends_video = true;
      p.video_ssrc = sec.ssrc;
    } else if (sec.kind == "audio") {
      p.sends_audio = true;
      p.audio_ssrc = sec.ssrc;
    }
  }

  st.participants[participant_id] = p;
  std::vector<std::pair<rewrite::StreamKey, uint16_t>> allocated;
  try {
    // dedicated peer connection per (sender, receiver) direction; each
    // video direction gets its rewrite-table slot up front
    for (const auto& [oid, other] : st.participants) {
      if (oid == participant_id) continue;
      for (const auto& [sender, receiver] :
           {std::pair{p, other}, std::pair{other, p}}) {
        if (!sender.sends_video) continue;
        rewrite::StreamKey key{sender.address, receiver.address, sender.video_ssrc};
        uint16_t idx = index_alloc_.allocate();
        st.rewrite_indices[key] = idx;
        allocated.push_back({key, idx});
      }
    }
    apply_membership_change(st);
  } catch (const pre::PreException& e) {
    for (const auto& [key, idx] : allocated) {
      index_alloc_.release(idx);
      st.rewrite_indices.erase(key);
    }
    st.participants.erase(participant_id);
    throw ControlException(ControlError::CapacityExceeded, e.what());
  } catch (...) {
    for (const auto& [key, idx] : allocated) {
      index_alloc_.release(idx);
      st.rewrite_indices.erase(key);
    }
    st.participants.erase(participant_id);
    throw;
  }

  nlohmann::ordered_json payload;
  payload["meeting_id"] = meeting_id;
  payload["participant_id"] = participant_id;
  payload["video_ssrc"] = p.video_ssrc;
  payload["audio_ssrc"] = p.audio_ssrc;
  payload["address"] = {{"ip", p.address.ip}, {"port", p.address.port}};
  payload["mode"] = planner::mode_name(st.mode);
  to_agent_.push({"participant_joined", payload});

  // the answer points every candidate at the SFU so each participant sees
  // the SFU as its sole peer
  SdpMessage answer;
  answer.session_id = offer.session_id;
  for (const auto& sec : offer.media_sections) {
    MediaSection s = sec;
    s.candidates = {sfu_address_};
    answer.media_sections.push_back(std::move(s));
  }
  return answer;
}

void Controller::handle_leave(uint32_t meeting_id, uint32_t participant_id) {
  auto it = meetings_.find(meeting_id);
  if (it == meetings_.end()) {
    throw ControlException(ControlError::UnknownMeeting,
                           "unknown meeting " + std::to_string(meeting_id));
  }
  MeetingState& st = it->second;
  auto pit = st.participants.find(participant_id);
  if (pit == st.participants.end()) {
    throw ControlException(ControlError::UnknownParticipant,
                           "participant not in meeting: " + std::to_string(participant_id));
  }
  const wire::Endpoint addr = pit->second.address;
  st.participants.erase(pit);

  // streams end now; their rewrite indices free immediately
  for (auto kit = st.rewrite_indices.begin(); kit != st.rewrite_indices.end();) {
    if (kit->first.sender_addr == addr || kit->first.receiver_addr == addr) {
      index_alloc_.release(kit->second);
      kit = st.rewrite_indices.erase(kit);
    } else {
      ++kit;
    }
  }

  apply_membership_change(st);
  nlohmann::ordered_json payload;
  payload["meeting_id"] = meeting_id;
  payload["participant_id"] = participant_id;
  to_agent_.push({"participant_left", payload});

  if (st.participants.empty()) meetings_.erase(it);
}

nlohmann::ordered_json Controller::dump_rules() const {
  nlohmann::ordered_json j;
  j["sfu_address"] = {{"ip", sfu_address_.ip}, {"port", sfu_address_.port}};
  j["meetings"] = nlohmann::ordered_json::array();
  for (const auto& [id, st] : meetings_) {
    nlohmann::ordered_json m;
    m["meeting_id"] = id;
    m["mode"] = planner::mode_name(st.mode);
    m["participants"] = nlohmann::ordered_json::array();
    for (const auto& [pid, p] : st.participants) {
      m["participants"].push_back({{"id", pid},
                                   {"ip", p.address.ip},
                                   {"port", p.address.port},
                                   {"video_ssrc", p.video_ssrc},
                                   {"audio_ssrc", p.audio_ssrc}});
    }
    m["rewrite_indices"] = nlohmann::ordered_json::array();
    for (const auto& [key, idx] : st.rewrite_indices) {
      m["rewrite_indices"].push_back({{"sender_port", key.sender_addr.port},
                                      {"receiver_port", key.receiver_addr.port},
                                      {"ssrc", key.ssrc},
                                      {"index", idx}});
    }
    j["meetings"].push_back(m);
  }
  j["data_plane"] = nlohmann::json::parse(deployment_.dump_json());
  return j;
}

}  // namespace sfu::control
