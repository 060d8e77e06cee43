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

#include "doctest.h"
#include "sfu/control/agent.hpp"
#include "sfu/control/controller.hpp"

using namespace sfu;
using namespace sfu::control;

namespace {

struct Harness {
  pre::Engine engine;
  planner::Deployment deployment{engine};
  MessageChannel channel;
  Controller controller{channel, deployment, {0x0A0000FE, 4000}};
  Agent agent{channel, deployment, AgentConfig{}};

  SdpMessage offer_for(uint32_t id) {
    SdpMessage offer;
    offer.session_id = "s";
    offer.media_sections.push_back(
        {"video", 0x10000 + id, "av1", {{0x0A000000 + id, uint16_t(5000 + id)}}});
    offer.media_sections.push_back(
        {"audio", 0x20000 + id, "opus", {{0x0A000000 + id, uint16_t(5000 + id)}}});
    return offer;
  }

  SdpMessage join(uint32_t meeting, uint32_t id) {
    SdpMessage answer = controller.handle_join(meeting, id, offer_for(id));
    agent.process_messages();
    return answer;
  }
};

}  // namespace

TEST_SUITE("control") {

TEST_CASE("answers only ever advertise the sfu address") {
  Harness h;
  auto a1 = h.join(1, 1);
  auto a2 = h.join(1, 2);
  auto a3 = h.join(1, 3);
  for (const auto* answer : {&a1, &a2, &a3}) {
    for (const auto& sec : answer->media_sections) {
      REQUIRE(sec.candidates.size() == 1);
      CHECK(sec.candidates[0] == h.controller.sfu_address());
      // never a participant's own candidate
      CHECK(sec.candidates[0].ip != 0x0A000001);
      CHECK(sec.candidates[0].ip != 0x0A000002);
      CHECK(sec.candidates[0].ip != 0x0A000003);
    }
  }
}

TEST_CASE("second join plans two-party, third migrates to a tree") {
  Harness h;
  h.join(1, 1);
  CHECK_FALSE(h.deployment.has_meeting(1));  // nothing to forward yet
  h.join(1, 2);
  REQUIRE(h.deployment.has_meeting(1));
  CHECK(h.deployment.rules(1).mode == planner::Mode::two_party);
  CHECK(h.engine.tree_count() == 0);
  h.join(1, 3);
  CHECK(h.deployment.rules(1).mode == planner::Mode::nra);
  CHECK(h.engine.tree_count() == 1);
  CHECK(h.deployment.deliver_video(1, 1, 0) == std::set<uint32_t>{5002, 5003});
}

TEST_CASE("duplicate join rejected") {
  Harness h;
  h.join(1, 1);
  CHECK_THROWS_AS(h.join(1, 1), ControlException);
}

TEST_CASE("join into a full engine fails atomically") {
  pre::PreResources res;
  res.max_trees = 0;
  Harness h;
  // separate harness with a zero-budget engine
  pre::Engine engine(res);
  planner::Deployment deployment(engine);
  MessageChannel channel;
  Controller controller(channel, deployment, {0x0A0000FE, 4000});
  controller.handle_join(1, 1, h.offer_for(1));
  controller.handle_join(1, 2, h.offer_for(2));  // two-party: no tree needed
  CHECK_THROWS_AS(controller.handle_join(1, 3, h.offer_for(3)), ControlException);
  // meeting unchanged: participant 3 not retained
  CHECK(controller.meeting(1).participants.size() == 2);
  CHECK(deployment.rules(1).mode == planner::Mode::two_party);
}

TEST_CASE("leave tears down to unicast and frees indices") {
  Harness h;
  h.join(1, 1);
  h.join(1, 2);
  h.join(1, 3);
  size_t indices_at_three = h.controller.meeting(1).rewrite_indices.size();
  CHECK(indices_at_three == 6);  // 3 ordered pairs x video, both directions
  h.controller.handle_leave(1, 3);
  h.agent.process_messages();
  CHECK(h.deployment.rules(1).mode == planner::Mode::two_party);
  CHECK(h.engine.tree_count() == 0);
  CHECK(h.controller.meeting(1).rewrite_indices.size() == 2);
  h.controller.handle_leave(1, 2);
  h.controller.handle_leave(1, 1);
  CHECK_FALSE(h.controller.has_meeting(1));
  CHECK_THROWS_AS(h.controller.handle_leave(1, 1), ControlException);
}

TEST_CASE("rewrite indices are unique and reusable") {
  RewriteIndexAllocator alloc(4);
  uint16_t a = alloc.allocate();
  uint16_t b = alloc.allocate();
  uint16_t c = alloc.allocate();
  CHECK(a != b);
  CHECK(b != c);
  alloc.release(b);
  uint16_t d = alloc.allocate();
  CHECK(d == b);  // freed slot reused
  alloc.allocate();
  CHECK_THROWS_AS(alloc.allocate(), ControlException);
}

TEST_CASE("meeting-wide index uniqueness holds across churn") {
  Harness h;
  for (uint32_t id = 1; id <= 6; ++id) h.join(1, id);
  std::set<uint16_t> seen;
  for (const auto& [key, idx] : h.controller.meeting(1).rewrite_indices) {
    CHECK(seen.insert(idx).second);
  }
  h.controller.handle_leave(1, 2);
  h.join(1, 7);
  seen.clear();
  for (const auto& [key, idx] : h.controller.meeting(1).rewrite_indices) {
    CHECK(seen.insert(idx).second);
  }
}

TEST_CASE("stun responder echoes the source as xor-mapped") {
  Harness h;
  wire::StunMessage req;
  req.kind = wire::StunKind::binding_request;
  req.transaction_id = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  wire::StunMessage resp = h.agent.stun_respond(req, {0x0A000005, 5000});
  CHECK(resp.kind == wire::StunKind::binding_response);
  CHECK(resp.transaction_id == req.transaction_id);
  REQUIRE(resp.xor_mapped_address.has_value());
  CHECK(resp.xor_mapped_address->ip == 0x0A000005);
  CHECK(resp.xor_mapped_address->port == 5000);
  // byte layout matches the reference builder
  Bytes wire_bytes = wire::serialize_stun(resp);
  CHECK(wire_bytes ==
        wire::build_binding_response(req.transaction_id, {0x0A000005, 5000}));
  wire::StunMessage reparsed = wire::parse_stun(wire_bytes);
  CHECK(reparsed.xor_mapped_address == resp.xor_mapped_address);

  wire::StunMessage not_request;
  not_request.kind = wire::StunKind::binding_response;
  CHECK_THROWS_AS(h.agent.stun_respond(not_request, {1, 2}), wire::ParseError);
}

TEST_CASE("dependency descriptor ingest recompiles drop sets") {
  Harness h;
  h.join(1, 1);
  h.join(1, 2);
  h.join(1, 3);

  feedback::StreamId sid = feedback::make_stream_id(1, 0x10001);
  wire::Av1Descriptor dd;
  dd.has_extended_structure = true;
  wire::TemplateStructure ts;
  ts.template_to_layer = {{0, 0}, {1, 0}, {2, 1}, {3, 2}, {4, 2}};
  dd.extended = ts;
  CHECK(h.agent.ingest_dependency_descriptor(sid, dd));
  CHECK_FALSE(h.agent.ingest_dependency_descriptor(sid, dd));  // unchanged: no churn

  // receiver 2 drops to mid: ids 3 and 4 go
  h.agent.on_remb(sid, 2, 1'000'000, 1000);
  h.agent.apply_pending_reconfig(1000);
  CHECK(h.agent.target_of(2, 1) == planner::Quality::mid);
  CHECK(h.agent.dropped_templates(2, 1) == std::set<uint8_t>{3, 4});

  // remapped ids on a later key frame follow the new structure
  wire::TemplateStructure ts2;
  ts2.template_to_layer = {{0, 0}, {1, 2}, {2, 2}, {3, 1}, {4, 0}};
  wire::Av1Descriptor dd2 = dd;
  dd2.extended = ts2;
  CHECK(h.agent.ingest_dependency_descriptor(sid, dd2));
  CHECK(h.agent.dropped_templates(2, 1) == std::set<uint8_t>{1, 2});

  wire::Av1Descriptor mandatory_only;
  CHECK_THROWS_AS(h.agent.ingest_dependency_descriptor(sid, mandatory_only),
                  wire::ParseError);
}

TEST_CASE("select_decode_target thresholds and hysteresis") {
  DecodePolicy policy;  // 500k / 1.5M, h = 3
  using planner::Quality;

  CHECK(select_decode_target(Quality::high, {}, 2'000'000, policy) == Quality::high);
  CHECK(select_decode_target(Quality::high, {}, 1'000'000, policy) == Quality::mid);
  CHECK(select_decode_target(Quality::high, {}, 100'000, policy) == Quality::low);
  CHECK(select_decode_target(Quality::mid, {}, 900'000, policy) == Quality::mid);

  // upgrade requires the last h estimates to clear the bar
  CHECK(select_decode_target(Quality::mid, {2'000'000}, 2'000'000, policy) == Quality::mid);
  CHECK(select_decode_target(Quality::mid, {2'000'000, 2'000'000}, 2'000'000, policy) ==
        Quality::high);
  CHECK(select_decode_target(Quality::mid, {2'000'000, 900'000}, 2'000'000, policy) ==
        Quality::mid);
}

TEST_CASE("oscillating estimates cause at most one change per window") {
  DecodePolicy policy;
  using planner::Quality;
  Quality current = Quality::mid;
  std::vector<uint64_t> history;
  int changes = 0;
  // alternate around theta_high: never three clean highs in a row
  for (int i = 0; i < 30; ++i) {
    uint64_t est = (i % 2 == 0) ? 1'600'000 : 1'400'000;
    Quality next = select_decode_target(current, history, est, policy);
    if (next != current) ++changes;
    current = next;
    history.push_back(est);
  }
  CHECK(changes == 0);
}

TEST_CASE("agent replans the data plane when a target drops") {
  Harness h;
  h.join(1, 1);
  h.join(1, 2);
  h.join(1, 3);
  CHECK(h.deployment.rules(1).mode == planner::Mode::nra);
  feedback::StreamId sid = feedback::make_stream_id(1, 0x10001);
  h.agent.on_remb(sid, 3, 1'000'000, 500);
  h.agent.apply_pending_reconfig(500);
  CHECK(h.deployment.rules(1).mode == planner::Mode::ra_r);
  // layer-2 templates no longer reach participant 3
  CHECK(h.deployment.deliver_video(1, 1, 3) == std::set<uint32_t>{5002});
  CHECK(h.deployment.deliver_video(1, 1, 0) == std::set<uint32_t>{5002, 5003});
}

TEST_CASE("message channel carries join and leave envelopes") {
  pre::Engine engine;
  planner::Deployment deployment(engine);
  MessageChannel channel;
  Controller controller(channel, deployment, {0x0A0000FE, 4000});
  Harness helper;
  controller.handle_join(1, 1, helper.offer_for(1));
  REQUIRE_FALSE(channel.empty());
  AgentMessage m = channel.pop();
  CHECK(m.type == "participant_joined");
  CHECK(m.payload.at("participant_id") == 1);
  controller.handle_join(1, 2, helper.offer_for(2));
  channel.pop();
  controller.handle_leave(1, 2);
  AgentMessage l = channel.pop();
  CHECK(l.type == "participant_left");
}

TEST_CASE("rule dump is valid json with meetings and indices") {
  Harness h;
  h.join(1, 1);
  h.join(1, 2);
  auto dump = h.controller.dump_rules();
  CHECK(dump.contains("meetings"));
  CHECK(dump["meetings"].size() == 1);
  CHECK(dump["meetings"][0]["participants"].size() == 2);
  CHECK(dump.contains("data_plane"));
}

}  // TEST_SUITE
