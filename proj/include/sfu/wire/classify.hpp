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

#ifndef SFU_WIRE_CLASSIFY_HPP
#define SFU_WIRE_CLASSIFY_HPP

#include <variant>
#include <vector>

#include "sfu/wire/av1.hpp"
#include "sfu/wire/rtcp.hpp"
#include "sfu/wire/rtp.hpp"
#include "sfu/wire/stun.hpp"

namespace sfu::wire {

// Exactly one route per packet. Packets with agent copies keep flowing in
// the data plane; only the copy reaches software.
enum class PlaneRoute {
  data_plane,
  data_plane_with_copy_to_agent,
  control_plane_only,
};

using ParsedPacket = std::variant<RtpPacket, std::vector<RtcpMessage>, StunMessage>;

struct StreamRegistry {
  RtpParseContext rtp_ctx;
};

PlaneRoute classify(const ParsedPacket& packet, const StreamRegistry& registry = {});

// Parses a UDP payload by lookahead (RTP vs RTCP vs STUN) and classifies it.
struct ClassifiedPacket {
  ParsedPacket packet;
  PlaneRoute route;
};
ClassifiedPacket parse_and_classify(BytesView bytes,
                                    unsigned max_depth = kDefaultMaxParseDepth,
                                    const StreamRegistry& registry = {});

}  // namespace sfu::wire

#endif  // SFU_WIRE_CLASSIFY_HPP
