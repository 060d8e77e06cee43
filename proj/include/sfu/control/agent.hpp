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

#ifndef SFU_CONTROL_AGENT_HPP
#define SFU_CONTROL_AGENT_HPP

#include <deque>
#include <map>
#include <optional>
#include <vector>

#include "sfu/control/controller.hpp"
#include "sfu/feedback/feedback.hpp"
#include "sfu/wire/av1.hpp"

namespace sfu::control {

// Fixed-threshold decode-target policy with upgrade hysteresis; adopters
// may swap in their own selection function.
struct DecodePolicy {
  uint64_t theta_low_bps = 500'000;
  uint64_t theta_high_bps = 1'500'000;
  unsigned hysteresis = 3;
};

planner::Quality select_decode_target(planner::Quality current,
                                      const std::vector<uint64_t>& estimate_history,
                                      uint64_t new_estimate, const DecodePolicy& policy);

struct AgentConfig {
  DecodePolicy policy;
  double ewma_alpha = 0.3;
  int64_t selection_period_us = 500'000;
  // frame-position to temporal-layer map of the SVC streams it manages
  std::vector<uint8_t> layer_cycle{0, 2, 1, 2};
  uint16_t min_packets_per_frame = 1;
};

struct TargetChange {
  int64_t time_us = 0;
  uint32_t receiver = 0;
  uint32_t sender = 0;
  planner::Quality old_level = planner::Quality::high;
  planner::Quality new_level = planner::Quality::high;
};

// Switch agent: consumes controller messages and data-plane packet copies,
// keeps SVC structures and per-receiver decode targets, and reconfigures
// the data plane. Never on the media forwarding path.
class Agent {
 public:
  Agent(MessageChannel& from_controller, planner::Deployment& deployment, AgentConfig cfg);

  void process_messages();

  wire::StunMessage stun_respond(const wire::StunMessage& request, const wire::Endpoint& src);

  // Key-frame copy: stores the template structure and recompiles every
  // receiver's drop set for the stream. Returns true when rules changed.
  bool ingest_dependency_descriptor(feedback::StreamId stream, const wire::Av1Descriptor& dd);

  // REMB copy for (stream, receiver): EWMA update plus decode-target
  // re-evaluation against the raw estimate history. Data-plane rule changes
  // are staged and land on the next apply_pending_reconfig call.
  void on_remb(feedback::StreamId stream, uint32_t receiver, uint64_t bps, int64_t now_us);

  // Installs staged quality changes into the data plane. Callers invoke
  // this at frame-cycle boundaries so switches never split a frame group.
  void apply_pending_reconfig(int64_t now_us);

  // Periodic best-downlink selection across all tracked streams.
  void periodic_selection(int64_t now_us);

  planner::Quality target_of(uint32_t receiver, uint32_t sender) const;
  const std::optional<wire::TemplateStructure>& structure(feedback::StreamId stream) const;
  std::set<uint8_t> dropped_templates(uint32_t receiver, uint32_t sender) const;
  rewrite::DropRule drop_rule_for(uint32_t receiver, uint32_t sender) const;

  feedback::FeedbackState& feedback_state() { return feedback_; }
  feedback::StreamDirectory& directory() { return directory_; }
  const std::vector<TargetChange>& target_changes() const { return target_changes_; }
  size_t rule_recompilations() const { return rule_recompilations_; }
  const AgentConfig& config() const { return cfg_; }

 private:
  struct ReceiverTrack {
    planner::Quality target = planner::Quality::high;
    std::deque<uint64_t> history;
  };
  void recompile_receiver_targets(int64_t now_us);

  MessageChannel& from_controller_;
  planner::Deployment& deployment_;
  AgentConfig cfg_;
  feedback::FeedbackState feedback_;
  feedback::StreamDirectory directory_;
  std::map<feedback::StreamId, std::optional<wire::TemplateStructure>> structures_;
  std::map<std::pair<uint32_t, uint32_t>, ReceiverTrack> tracks_;  // (receiver, sender)
  std::map<uint32_t, uint32_t> meeting_of_sender_;
  std::vector<TargetChange> target_changes_;
  size_t rule_recompilations_ = 0;
  bool pending_reconfig_ = false;
};

}  // namespace sfu::control

#endif  // SFU_CONTROL_AGENT_HPP
