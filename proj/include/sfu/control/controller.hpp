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

#ifndef SFU_CONTROL_CONTROLLER_HPP
#define SFU_CONTROL_CONTROLLER_HPP

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "sfu/planner/planner.hpp"
#include "sfu/rewrite/rewriter.hpp"
#include "sfu/wire/stun.hpp"

namespace sfu::control {

enum class ControlError {
  DuplicateParticipant,
  UnknownParticipant,
  UnknownMeeting,
  CapacityExceeded,
  IndexSpaceExhausted,
};

class ControlException : public std::runtime_error {
 public:
  ControlException(ControlError code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ControlError code() const { return code_; }

 private:
  ControlError code_;
};

// Minimal structured SDP: only the fields the SFU rewrites.
struct MediaSection {
  std::string kind;  // "audio" | "video"
  uint32_t ssrc = 0;
  std::string codec;
  std::vector<wire::Endpoint> candidates;
};

struct SdpMessage {
  std::string session_id;
  std::vector<MediaSection> media_sections;

  nlohmann::ordered_json to_json() const;
  static SdpMessage from_json(const nlohmann::json& j);
};

// Controller-to-agent envelope. The channel is in-process but carries the
// same schema a remote procedure interface would.
struct AgentMessage {
  std::string type;
  nlohmann::ordered_json payload;
};

class MessageChannel {
 public:
  void push(AgentMessage msg) { queue_.push_back(std::move(msg)); }
  bool empty() const { return queue_.empty(); }
  AgentMessage pop();
  size_t size() const { return queue_.size(); }

 private:
  std::deque<AgentMessage> queue_;
};

// Hands out collision-free rewrite-table indices; freed slots are reused.
class RewriteIndexAllocator {
 public:
  explicit RewriteIndexAllocator(uint32_t capacity = 65536) : capacity_(capacity) {}
  uint16_t allocate();
  void release(uint16_t index);
  size_t in_use() const { return used_.size(); }

 private:
  uint32_t capacity_;
  uint32_t next_ = 0;
  std::set<uint16_t> used_;
  std::vector<uint16_t> free_list_;
};

struct ParticipantState {
  uint32_t id = 0;
  wire::Endpoint address;
  uint32_t video_ssrc = 0;
  uint32_t audio_ssrc = 0;
  bool sends_video = false;
  bool sends_audio = false;
};

struct MeetingState {
  uint32_t meeting_id = 0;
  std::map<uint32_t, ParticipantState> participants;
  planner::Mode mode = planner::Mode::two_party;
  // directional media connections and their rewrite-table indices
  std::map<rewrite::StreamKey, uint16_t> rewrite_indices;
};

// Central controller: signaling, meeting membership, SDP candidate
// rewriting, and rewrite-index management. Emits data-plane reconfiguration
// requests to the switch agent over the message channel.
class Controller {
 public:
  Controller(MessageChannel& to_agent, planner::Deployment& deployment,
             wire::Endpoint sfu_address);

  SdpMessage handle_join(uint32_t meeting_id, uint32_t participant_id, const SdpMessage& offer);
  void handle_leave(uint32_t meeting_id, uint32_t participant_id);

  const MeetingState& meeting(uint32_t meeting_id) const;
  bool has_meeting(uint32_t meeting_id) const { return meetings_.count(meeting_id) != 0; }
  const wire::Endpoint& sfu_address() const { return sfu_address_; }

  nlohmann::ordered_json dump_rules() const;

 private:
  planner::MeetingPlan to_plan(const MeetingState& st, planner::Mode mode) const;
  void apply_membership_change(MeetingState& st);

  MessageChannel& to_agent_;
  planner::Deployment& deployment_;
  wire::Endpoint sfu_address_;
  RewriteIndexAllocator index_alloc_;
  std::map<uint32_t, MeetingState> meetings_;
};

}  // namespace sfu::control

#endif  // SFU_CONTROL_CONTROLLER_HPP
