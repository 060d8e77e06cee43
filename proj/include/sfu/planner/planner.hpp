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

#ifndef SFU_PLANNER_PLANNER_HPP
#define SFU_PLANNER_PLANNER_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sfu/pre/engine.hpp"

namespace sfu::planner {

enum class Mode { two_party, nra, ra_r, ra_sr };

enum class Quality : uint8_t { low = 0, mid = 1, high = 2 };

std::string mode_name(Mode m);
std::optional<Mode> mode_from_name(const std::string& s);

// Quality tier plus the template ids it suppresses under the L1T3 layout
// (templates 0/1 base, 2 first enhancement, 3/4 second enhancement).
struct DecodeTarget {
  Quality level = Quality::high;
  std::set<uint8_t> dropped_template_ids;

  static DecodeTarget for_level(Quality q);
  bool forwards(uint8_t template_id) const { return !dropped_template_ids.count(template_id); }
  bool operator==(const DecodeTarget&) const = default;
};

struct Participant {
  uint32_t id = 0;
  uint32_t egress_port = 0;
  bool sends_video = true;
  bool sends_audio = true;
};

struct MeetingPlan {
  uint32_t meeting_id = 0;
  std::vector<Participant> participants;
  Mode mode = Mode::nra;
  uint8_t quality_count = 3;
  // ra_r: keyed by receiver; ra_sr: keyed by (receiver, sender)
  std::map<uint32_t, DecodeTarget> receiver_quality;
  std::map<std::pair<uint32_t, uint32_t>, DecodeTarget> pair_quality;

  const Participant* find(uint32_t id) const;
  DecodeTarget target_for(uint32_t receiver, uint32_t sender) const;
};

class PlannerError : public std::runtime_error {
 public:
  explicit PlannerError(const std::string& what) : std::runtime_error(what) {}
};

// How one (sender, template) packet enters the data plane: unicast for
// two-party meetings, otherwise a tree submission with pruning metadata.
struct ForwardRule {
  bool unicast = false;
  uint32_t unicast_port = 0;
  pre::PacketReplicationMeta meta;
};

// Installed state for one meeting. Lookup is an atomic swap during
// migration, so in-flight packets always resolve against one full plan.
struct MeetingRules {
  Mode mode = Mode::nra;
  // mgids this meeting's packets are submitted to (shared trees included)
  std::set<uint32_t> mgids;
  // video rule per (sender, template id); audio rule per sender
  std::map<std::pair<uint32_t, uint8_t>, ForwardRule> video_rules;
  std::map<uint32_t, ForwardRule> audio_rules;
};

// Owns tree construction on a PRE engine. Meetings planned in one batch may
// share trees (m meetings per tree, m <= 2: one exclusion id per packet can
// suppress exactly one co-tenant).
class Deployment {
 public:
  Deployment(pre::Engine& engine, unsigned meetings_per_tree = 2);

  // Batch planners; all meetings must carry the matching mode.
  void plan_nra(const std::vector<MeetingPlan>& meetings);
  void plan_ra_r(const std::vector<MeetingPlan>& meetings);
  void plan_ra_sr(const std::vector<MeetingPlan>& meetings);
  void plan_two_party(const MeetingPlan& meeting);
  void plan(const MeetingPlan& meeting);  // dispatch on meeting.mode

  // Make-before-break: new trees are created and rules swapped before old
  // trees are deallocated; on budget failure the old plan stays intact.
  void migrate(uint32_t meeting_id, Mode new_mode);
  // Re-plans a meeting in place (same mode) after membership/quality edits.
  void replan(const MeetingPlan& updated);
  void remove(uint32_t meeting_id);

  bool has_meeting(uint32_t meeting_id) const { return rules_.count(meeting_id) != 0; }
  const MeetingRules& rules(uint32_t meeting_id) const;
  const MeetingPlan& meeting(uint32_t meeting_id) const;

  const ForwardRule& video_rule(uint32_t meeting_id, uint32_t sender, uint8_t template_id) const;
  const ForwardRule& audio_rule(uint32_t meeting_id, uint32_t sender) const;

  // Receiver ports a (sender, template) video packet reaches under the
  // installed plan, via the PRE. Oracle for delivery checks.
  std::set<uint32_t> deliver_video(uint32_t meeting_id, uint32_t sender,
                                   uint8_t template_id) const;
  std::set<uint32_t> deliver_audio(uint32_t meeting_id, uint32_t sender) const;

  std::string dump_json() const;

 private:
  struct Group;  // shared-tree bookkeeping
  void install_group(const std::vector<MeetingPlan>& metings, Mode mode);
  std::map<uint32_t, MeetingRules> build_nra_group(const std::vector<MeetingPlan>& ms,
                                                   std::vector<uint32_t>& created);
  std::map<uint32_t, MeetingRules> build_ra_r_group(const std::vector<MeetingPlan>& ms,
                                                    std::vector<uint32_t>& created);
  std::map<uint32_t, MeetingRules> build_ra_sr_group(const std::vector<MeetingPlan>& ms,
                                                     std::vector<uint32_t>& created);
  uint32_t fresh_mgid();

  pre::Engine& engine_;
  unsigned meetings_per_tree_;
  uint32_t next_mgid_ = 1;
  std::map<uint32_t, MeetingPlan> meetings_;
  std::map<uint32_t, MeetingRules> rules_;
};

}  // namespace sfu::planner

#endif  // SFU_PLANNER_PLANNER_HPP
