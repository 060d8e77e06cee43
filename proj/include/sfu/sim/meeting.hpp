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

#ifndef SFU_SIM_MEETING_HPP
#define SFU_SIM_MEETING_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "sfu/control/agent.hpp"
#include "sfu/sim/channel.hpp"
#include "sfu/sim/svc.hpp"

namespace sfu::sim {

struct SimParticipant {
  uint32_t id = 0;
  bool sends_video = true;
  bool sends_audio = true;
  ChannelModel uplink;
  uint64_t downlink_capacity_bps = 5'000'000;
  // optional capacity steps (time_us, bps), applied in order
  std::vector<std::pair<int64_t, uint64_t>> capacity_steps;

  uint64_t capacity_at(int64_t t_us) const;
};

struct SimMeeting {
  uint32_t id = 0;
  std::string mode = "auto";  // auto | two_party | nra | ra_r | ra_sr
  std::vector<SimParticipant> participants;
};

struct SimConfig {
  int64_t duration_us = 10'000'000;
  uint64_t seed = 1;
  SvcPattern pattern = SvcPattern::table720p();
  control::AgentConfig agent;
  std::vector<SimMeeting> meetings;
  int64_t fps_window_us = 2'000'000;

  static SimConfig from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;
};

struct PlaneSplit {
  uint64_t data_packets = 0, agent_copy_packets = 0, control_packets = 0;
  uint64_t data_bytes = 0, agent_copy_bytes = 0, control_bytes = 0;
  std::map<std::string, uint64_t> packets_by_type;

  double data_packet_pct() const;
  double data_byte_pct() const;
};

struct StreamMetrics {
  uint32_t sender = 0, receiver = 0;
  uint64_t generated = 0, channel_dropped = 0, suppressed = 0, rewriter_dropped = 0,
           delivered = 0;
  uint64_t frames_delivered = 0;
  uint64_t nack_count = 0;
  uint64_t extra_nacks_vs_oracle = 0;
  double fps_before_adaptation = 0.0;
  double fps_final_window = 0.0;
  std::vector<double> fps_windows;
  int64_t first_target_change_us = -1;
  bool decodable = true;
};

struct SenderFeedback {
  uint64_t rembs_delivered = 0;
  uint64_t rembs_from_selected = 0;
  uint64_t last_target_bps = 0;
  std::map<uint32_t, uint64_t> rembs_by_origin;
};

struct SimMetrics {
  PlaneSplit split;
  std::map<std::string, StreamMetrics> streams;  // "m<id>:s<sender>->r<receiver>"
  std::map<uint32_t, SenderFeedback> sender_feedback;
  std::vector<control::TargetChange> target_changes;
  std::vector<feedback::SelectionChange> selection_changes;
  uint64_t stun_requests = 0, stun_responses = 0;

  nlohmann::ordered_json to_json() const;
  std::string fps_csv() const;
};

SimMetrics run_meeting(const SimConfig& config);

}  // namespace sfu::sim

#endif  // SFU_SIM_MEETING_HPP
