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

#include "sfu/planner/planner.hpp"

#include <algorithm>

#include "json.hpp"
#include "sfu/util/log.hpp"

namespace sfu::planner {

namespace {

constexpr uint8_t kTemplateCount = 5;

// L1T3 template layout: 0/1 base, 2 first enhancement, 3/4 second.
uint8_t template_layer(uint8_t template_id) {
  switch (template_id) {
    case 0:
    case 1: return 0;
    case 2: return 1;
    default: return 2;
  }
}

}  // namespace

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::two_party: return "two_party";
    case Mode::nra: return "nra";
    case Mode::ra_r: return "ra_r";
    case Mode::ra_sr: return "ra_sr";
  }
  return "?";
}

std::optional<Mode> mode_from_name(const std::string& s) {
  if (s == "two_party") return Mode::two_party;
  if (s == "nra") return Mode::nra;
  if (s == "ra_r") return Mode::ra_r;
  if (s == "ra_sr") return Mode::ra_sr;
  return std::nullopt;
}

DecodeTarget DecodeTarget::for_level(Quality q) {
  switch (q) {
    case Quality::high: return {Quality::high, {}};
    case Quality::mid: return {Quality::mid, {3, 4}};
    case Quality::low: return {Quality::low, {2, 3, 4}};
  }
  return {Quality::high, {}};
}

const Participant* MeetingPlan::find(uint32_t id) const {
  for (const auto& p : participants) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

DecodeTarget MeetingPlan::target_for(uint32_t receiver, uint32_t sender) const {
  if (mode == Mode::ra_sr) {
    auto it = pair_quality.find({receiver, sender});
    if (it != pair_quality.end()) return it->second;
  }
  auto it = receiver_quality.find(receiver);
  if (it != receiver_quality.end()) return it->second;
  return DecodeTarget::for_level(Quality::high);
}

Deployment::Deployment(pre::Engine& engine, unsigned meetings_per_tree)
    : engine_(engine), meetings_per_tree_(meetings_per_tree) {
  if (meetings_per_tree_ < 1 || meetings_per_tree_ > 2) {
    // a packet carries one L1 exclusion id, so it can suppress at most one
    // co-tenant meeting's branches
    throw PlannerError("meetings_per_tree must be 1 or 2");
  }
}

uint32_t Deployment::fresh_mgid() { return next_mgid_++; }

const MeetingRules& Deployment::rules(uint32_t meeting_id) const {
  auto it = rules_.find(meeting_id);
  if (it == rules_.end()) throw PlannerError("meeting not planned: " + std::to_string(meeting_id));
  return it->second;
}

const MeetingPlan& Deployment::meeting(uint32_t meeting_id) const {
  auto it = meetings_.find(meeting_id);
  if (it == meetings_.end()) throw PlannerError("unknown meeting: " + std::to_string(meeting_id));
  return it->second;
}

std::map<uint32_t, MeetingRules> Deployment::build_nra_group(const std::vector<MeetingPlan>& ms,
                                                             std::vector<uint32_t>& created) {
  uint32_t mgid = fresh_mgid();
  std::vector<pre::L1Node> nodes;
  std::map<uint32_t, uint32_t> rid_of;  // participant id -> rid (unique in group)
  uint32_t rid = 0;
  for (size_t slot = 0; slot < ms.size(); ++slot) {
    for (const auto& p : ms[slot].participants) {
      pre::L1Node n;
      n.rid = rid;
      n.l1_xid = uint32_t(slot + 1);
      n.prune_enabled = true;
      n.egress_port = p.egress_port;
      rid_of[p.id] = rid;
      nodes.push_back(n);
      ++rid;
    }
  }
  engine_.create_tree(mgid, std::move(nodes));
  created.push_back(mgid);

  std::map<uint32_t, MeetingRules> out;
  for (size_t slot = 0; slot < ms.size(); ++slot) {
    MeetingRules r;
    r.mode = Mode::nra;
    r.mgids.insert(mgid);
    uint32_t other_xid = uint32_t(slot == 0 ? 2 : 1);
    for (const auto& p : ms[slot].participants) {
      ForwardRule rule;
      rule.meta.mgid = mgid;
      rule.meta.l1_xid = other_xid;
      rule.meta.rid = rid_of[p.id];
      rule.meta.l2_xid_ports = {p.egress_port};
      if (p.sends_video) {
        for (uint8_t t = 0; t < kTemplateCount; ++t) r.video_rules[{p.id, t}] = rule;
      }
      if (p.sends_audio) r.audio_rules[p.id] = rule;
    }
    out[ms[slot].meeting_id] = std::move(r);
  }
  return out;
}

std::map<uint32_t, MeetingRules> Deployment::build_ra_r_group(const std::vector<MeetingPlan>& ms,
                                                              std::vector<uint32_t>& created) {
  uint8_t q = ms.front().quality_count;
  std::vector<uint32_t> mgids(q);
  std::map<uint32_t, uint32_t> rid_of;
  uint32_t rid = 0;
  for (const auto& m : ms) {
    for (const auto& p : m.participants) rid_of[p.id] = rid++;
  }
  // one tree per quality level; the level-l tree holds receivers whose
  // target is at least l, so a packet submitted to exactly one tree reaches
  // exactly the entitled receivers
  for (uint8_t level = 0; level < q; ++level) {
    std::vector<pre::L1Node> nodes;
    for (size_t slot = 0; slot < ms.size(); ++slot) {
      for (const auto& p : ms[slot].participants) {
        auto target = ms[slot].target_for(p.id, 0);
        if (uint8_t(target.level) < level) continue;
        pre::L1Node n;
        n.rid = rid_of[p.id];
        n.l1_xid = uint32_t(slot + 1);
        n.prune_enabled = true;
        n.egress_port = p.egress_port;
        nodes.push_back(n);
      }
    }
    mgids[level] = fresh_mgid();
    engine_.create_tree(mgids[level], std::move(nodes));
    created.push_back(mgids[level]);
  }

  std::map<uint32_t, MeetingRules> out;
  for (size_t slot = 0; slot < ms.size(); ++slot) {
    MeetingRules r;
    r.mode = Mode::ra_r;
    for (uint8_t level = 0; level < q; ++level) r.mgids.insert(mgids[level]);
    uint32_t other_xid = uint32_t(slot == 0 ? 2 : 1);
    for (const auto& p : ms[slot].participants) {
      if (p.sends_video) {
        for (uint8_t t = 0; t < kTemplateCount; ++t) {
          // submit to the lowest-quality tree that still forwards t
          uint8_t level = std::min<uint8_t>(template_layer(t), uint8_t(q - 1));
          ForwardRule rule;
          rule.meta.mgid = mgids[level];
          rule.meta.l1_xid = other_xid;
          rule.meta.rid = rid_of[p.id];
          rule.meta.l2_xid_ports = {p.egress_port};
          r.video_rules[{p.id, t}] = rule;
        }
      }
      if (p.sends_audio) {
        // audio is never rate-adapted; the low tree reaches everyone
        ForwardRule rule;
        rule.meta.mgid = mgids[0];
        rule.meta.l1_xid = other_xid;
        rule.meta.rid = rid_of[p.id];
        rule.meta.l2_xid_ports = {p.egress_port};
        r.audio_rules[p.id] = rule;
      }
    }
    out[ms[slot].meeting_id] = std::move(r);
  }
  return out;
}

std::map<uint32_t, MeetingRules> Deployment::build_ra_sr_group(const std::vector<MeetingPlan>& ms,
                                                               std::vector<uint32_t>& created) {
  uint8_t q = ms.front().quality_count;
  // stable rid space across the group; slot offset keeps (rid, port) unique
  // when the same receiver appears under both co-tenant senders
  std::map<uint32_t, uint32_t> idx_of;
  uint32_t idx = 0;
  for (const auto& m : ms) {
    for (const auto& p : m.participants) idx_of[p.id] = idx++;
  }
  uint32_t slot_stride = idx;

  struct SenderRef {
    const MeetingPlan* meeting;
    const Participant* sender;
  };
  std::vector<SenderRef> senders;
  for (const auto& m : ms) {
    for (const auto& p : m.participants) {
      if (p.sends_video || p.sends_audio) senders.push_back({&m, &p});
    }
  }

  std::map<uint32_t, MeetingRules> out;
  for (const auto& m : ms) {
    MeetingRules r;
    r.mode = Mode::ra_sr;
    out[m.meeting_id] = std::move(r);
  }

  // two senders (and their receiver sets) share each quality tree
  for (size_t pair = 0; pair * 2 < senders.size(); ++pair) {
    std::vector<uint32_t> mgids(q);
    for (uint8_t level = 0; level < q; ++level) {
      std::vector<pre::L1Node> nodes;
      for (size_t k = 0; k < 2; ++k) {
        size_t si = pair * 2 + k;
        if (si >= senders.size()) break;  // half-occupied tree, slot reusable
        const auto& ref = senders[si];
        for (const auto& recv : ref.meeting->participants) {
          if (recv.id == ref.sender->id) continue;
          auto target = ref.meeting->target_for(recv.id, ref.sender->id);
          if (uint8_t(target.level) < level) continue;
          pre::L1Node n;
          n.rid = uint32_t(k) * slot_stride + idx_of[recv.id];
          n.l1_xid = uint32_t(k + 1);
          n.prune_enabled = true;
          n.egress_port = recv.egress_port;
          nodes.push_back(n);
        }
      }
      mgids[level] = fresh_mgid();
      engine_.create_tree(mgids[level], std::move(nodes));
      created.push_back(mgids[level]);
    }
    for (size_t k = 0; k < 2; ++k) {
      size_t si = pair * 2 + k;
      if (si >= senders.size()) break;
      const auto& ref = senders[si];
      MeetingRules& r = out[ref.meeting->meeting_id];
      for (uint8_t level = 0; level < q; ++level) r.mgids.insert(mgids[level]);
      uint32_t other_xid = uint32_t(k == 0 ? 2 : 1);
      uint32_t sender_rid = uint32_t(k) * slot_stride + idx_of[ref.sender->id];
      if (ref.sender->sends_video) {
        for (uint8_t t = 0; t < kTemplateCount; ++t) {
          uint8_t level = std::min<uint8_t>(template_layer(t), uint8_t(q - 1));
          ForwardRule rule;
          rule.meta.mgid = mgids[level];
          rule.meta.l1_xid = other_xid;
          rule.meta.rid = sender_rid;
          rule.meta.l2_xid_ports = {ref.sender->egress_port};
          r.video_rules[{ref.sender->id, t}] = rule;
        }
      }
      if (ref.sender->sends_audio) {
        ForwardRule rule;
        rule.meta.mgid = mgids[0];
        rule.meta.l1_xid = other_xid;
        rule.meta.rid = sender_rid;
        rule.meta.l2_xid_ports = {ref.sender->egress_port};
        r.audio_rules[ref.sender->id] = rule;
      }
    }
  }
  return out;
}

void Deployment::install_group(const std::vector<MeetingPlan>& ms, Mode mode) {
  std::vector<uint32_t> created;
  try {
    std::map<uint32_t, MeetingRules> built;
    switch (mode) {
      case Mode::nra:
        built = build_nra_group(ms, created);
        break;
      case Mode::ra_r:
        built = build_ra_r_group(ms, created);
        break;
      case Mode::ra_sr:
        built = build_ra_sr_group(ms, created);
        break;
      case Mode::two_party: {
        const MeetingPlan& m = ms.front();
        if (m.participants.size() != 2) {
          throw PlannerError("two_party meetings need exactly 2 participants");
        }
        MeetingRules r;
        r.mode = Mode::two_party;
        for (size_t i = 0; i < 2; ++i) {
          const auto& p = m.participants[i];
          const auto& peer = m.participants[1 - i];
          ForwardRule rule;
          rule.unicast = true;
          rule.unicast_port = peer.egress_port;
          if (p.sends_video) {
            for (uint8_t t = 0; t < kTemplateCount; ++t) r.video_rules[{p.id, t}] = rule;
          }
          if (p.sends_audio) r.audio_rules[p.id] = rule;
        }
        built[m.meeting_id] = std::move(r);
        break;
      }
    }
    for (const auto& m : ms) meetings_[m.meeting_id] = m;
    for (auto& [id, r] : built) rules_[id] = std::move(r);
  } catch (...) {
    for (uint32_t mgid : created) engine_.destroy_tree(mgid);
    throw;
  }
}

void Deployment::plan_nra(const std::vector<MeetingPlan>& meetings) {
  for (size_t i = 0; i < meetings.size(); i += meetings_per_tree_) {
    std::vector<MeetingPlan> group(meetings.begin() + i,
                                   meetings.begin() + std::min(i + meetings_per_tree_,
                                                               meetings.size()));
    for (const auto& m : group) {
      if (m.mode != Mode::nra) throw PlannerError("plan_nra requires nra meetings");
    }
    install_group(group, Mode::nra);
  }
}

void Deployment::plan_ra_r(const std::vector<MeetingPlan>& meetings) {
  for (size_t i = 0; i < meetings.size(); i += meetings_per_tree_) {
    std::vector<MeetingPlan> group(meetings.begin() + i,
                                   meetings.begin() + std::min(i + meetings_per_tree_,
                                                               meetings.size()));
    for (const auto& m : group) {
      if (m.mode != Mode::ra_r) throw PlannerError("plan_ra_r requires ra_r meetings");
    }
    install_group(group, Mode::ra_r);
  }
}

void Deployment::plan_ra_sr(const std::vector<MeetingPlan>& meetings) {
  // sender pairing already aggregates two senders per tree; meetings are
  // grouped one per call so rid spaces stay small
  for (const auto& m : meetings) {
    if (m.mode != Mode::ra_sr) throw PlannerError("plan_ra_sr requires ra_sr meetings");
    install_group({m}, Mode::ra_sr);
  }
}

void Deployment::plan_two_party(const MeetingPlan& meeting) {
  install_group({meeting}, Mode::two_party);
}

void Deployment::plan(const MeetingPlan& meeting) {
  switch (meeting.mode) {
    case Mode::nra: plan_nra({meeting}); break;
    case Mode::ra_r: plan_ra_r({meeting}); break;
    case Mode::ra_sr: plan_ra_sr({meeting}); break;
    case Mode::two_party: plan_two_party(meeting); break;
  }
}

void Deployment::replan(const MeetingPlan& updated) {
  uint32_t id = updated.meeting_id;
  if (!rules_.count(id)) {
    plan(updated);
    return;
  }
  std::set<uint32_t> old_mgids = rules_[id].mgids;

  // make-before-break: bring up the new plan first
  install_group({updated}, updated.mode);

  // deallocate exclusively-owned old trees; rebuild any co-tenant still on
  // a shared tree so its stale branches are reclaimed
  for (uint32_t mgid : old_mgids) {
    if (!engine_.has_tree(mgid)) continue;
    std::vector<uint32_t> tenants;
    for (const auto& [mid, r] : rules_) {
      if (mid != id && r.mgids.count(mgid)) tenants.push_back(mid);
    }
    if (tenants.empty()) {
      engine_.destroy_tree(mgid);
      continue;
    }
    for (uint32_t tenant : tenants) {
      MeetingPlan tenant_plan = meetings_.at(tenant);
      try {
        install_group({tenant_plan}, tenant_plan.mode);
      } catch (const pre::PreException& e) {
        // co-tenant keeps serving from the shared tree; only capacity
        // accounting is left degraded
        log::warn(std::string("co-tenant rebuild deferred: ") + e.what());
        continue;
      }
    }
    if (engine_.has_tree(mgid)) {
      bool still_used = false;
      for (const auto& [mid, r] : rules_) {
        if (r.mgids.count(mgid)) still_used = true;
      }
      if (!still_used) engine_.destroy_tree(mgid);
    }
  }
}

void Deployment::migrate(uint32_t meeting_id, Mode new_mode) {
  MeetingPlan plan = meeting(meeting_id);
  plan.mode = new_mode;
  replan(plan);
}

void Deployment::remove(uint32_t meeting_id) {
  if (!rules_.count(meeting_id)) {
    throw PlannerError("unknown meeting: " + std::to_string(meeting_id));
  }
  std::set<uint32_t> old_mgids = rules_[meeting_id].mgids;
  rules_.erase(meeting_id);
  meetings_.erase(meeting_id);
  for (uint32_t mgid : old_mgids) {
    if (!engine_.has_tree(mgid)) continue;
    std::vector<uint32_t> tenants;
    for (const auto& [mid, r] : rules_) {
      if (r.mgids.count(mgid)) tenants.push_back(mid);
    }
    if (tenants.empty()) {
      engine_.destroy_tree(mgid);
      continue;
    }
    for (uint32_t tenant : tenants) {
      MeetingPlan tenant_plan = meetings_.at(tenant);
      try {
        install_group({tenant_plan}, tenant_plan.mode);
      } catch (const pre::PreException& e) {
        log::warn(std::string("co-tenant rebuild deferred: ") + e.what());
      }
    }
    bool still_used = false;
    for (const auto& [mid, r] : rules_) {
      if (r.mgids.count(mgid)) still_used = true;
    }
    if (!still_used && engine_.has_tree(mgid)) engine_.destroy_tree(mgid);
  }
}

const ForwardRule& Deployment::video_rule(uint32_t meeting_id, uint32_t sender,
                                          uint8_t template_id) const {
  const auto& r = rules(meeting_id);
  auto it = r.video_rules.find({sender, template_id});
  if (it == r.video_rules.end()) {
    throw PlannerError("no video rule for sender " + std::to_string(sender));
  }
  return it->second;
}

const ForwardRule& Deployment::audio_rule(uint32_t meeting_id, uint32_t sender) const {
  const auto& r = rules(meeting_id);
  auto it = r.audio_rules.find(sender);
  if (it == r.audio_rules.end()) {
    throw PlannerError("no audio rule for sender " + std::to_string(sender));
  }
  return it->second;
}

std::set<uint32_t> Deployment::deliver_video(uint32_t meeting_id, uint32_t sender,
                                             uint8_t template_id) const {
  const ForwardRule& rule = video_rule(meeting_id, sender, template_id);
  std::set<uint32_t> ports;
  if (rule.unicast) {
    ports.insert(rule.unicast_port);
    return ports;
  }
  for (const auto& rep : engine_.replicate(rule.meta)) ports.insert(rep.egress_port);
  return ports;
}

std::set<uint32_t> Deployment::deliver_audio(uint32_t meeting_id, uint32_t sender) const {
  const ForwardRule& rule = audio_rule(meeting_id, sender);
  std::set<uint32_t> ports;
  if (rule.unicast) {
    ports.insert(rule.unicast_port);
    return ports;
  }
  for (const auto& rep : engine_.replicate(rule.meta)) ports.insert(rep.egress_port);
  return ports;
}

std::string Deployment::dump_json() const {
  nlohmann::ordered_json j;
  j["meetings"] = nlohmann::ordered_json::array();
  for (const auto& [id, r] : rules_) {
    nlohmann::ordered_json m;
    m["meeting_id"] = id;
    m["mode"] = mode_name(r.mode);
    m["mgids"] = r.mgids;
    nlohmann::ordered_json rules_json = nlohmann::ordered_json::array();
    for (const auto& [key, rule] : r.video_rules) {
      nlohmann::ordered_json rj;
      rj["sender"] = key.first;
      rj["template_id"] = key.second;
      if (rule.unicast) {
        rj["unicast_port"] = rule.unicast_port;
      } else {
        rj["mgid"] = rule.meta.mgid;
        rj["l1_xid"] = rule.meta.l1_xid;
        rj["rid"] = rule.meta.rid;
      }
      rules_json.push_back(rj);
    }
    m["video_rules"] = rules_json;
    j["meetings"].push_back(m);
  }
  return j.dump(2);
}

}  // namespace sfu::planner
