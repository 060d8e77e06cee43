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

#include "sfu/wire/classify.hpp"

#include "sfu/util/log.hpp"

namespace sfu::wire {

namespace {

bool carries_extended_structure(const RtpPacket& p, uint8_t av1_ext_id) {
  for (const auto& el : p.extensions) {
    if (el.is_padding || el.id != av1_ext_id) continue;
    try {
      return parse_av1_descriptor(el, av1_ext_id).has_extended_structure;
    } catch (const ParseError&) {
      return false;
    }
  }
  return false;
}

}  // namespace

PlaneRoute classify(const ParsedPacket& packet, const StreamRegistry& registry) {
  if (const auto* rtp = std::get_if<RtpPacket>(&packet)) {
    if (rtp->media_kind == MediaKind::video &&
        carries_extended_structure(*rtp, registry.rtp_ctx.av1dd_extension_id)) {
      return PlaneRoute::data_plane_with_copy_to_agent;
    }
    return PlaneRoute::data_plane;
  }
  if (const auto* rtcp = std::get_if<std::vector<RtcpMessage>>(&packet)) {
    for (const auto& m : *rtcp) {
      switch (m.kind) {
        case RtcpKind::RR:
        case RtcpKind::REMB:
        case RtcpKind::NACK:
        case RtcpKind::PLI:
          return PlaneRoute::data_plane_with_copy_to_agent;
        case RtcpKind::SR:
        case RtcpKind::SDES:
          break;
      }
    }
    return PlaneRoute::data_plane;
  }
  if (std::holds_alternative<StunMessage>(packet)) {
    return PlaneRoute::control_plane_only;
  }
  log::warn("unknown packet kind, routing to control plane");
  return PlaneRoute::control_plane_only;
}

ClassifiedPacket parse_and_classify(BytesView bytes, unsigned max_depth,
                                    const StreamRegistry& registry) {
  ParsedPacket parsed;
  if (looks_like_stun(bytes)) {
    parsed = parse_stun(bytes);
  } else if (looks_like_rtcp(bytes)) {
    parsed = parse_rtcp_compound(bytes);
  } else {
    parsed = parse_rtp(bytes, max_depth, registry.rtp_ctx);
  }
  PlaneRoute route = classify(parsed, registry);
  return ClassifiedPacket{std::move(parsed), route};
}

}  // namespace sfu::wire
