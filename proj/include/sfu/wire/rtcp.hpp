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

#ifndef SFU_WIRE_RTCP_HPP
#define SFU_WIRE_RTCP_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sfu/util/bytes.hpp"
#include "sfu/wire/rtp.hpp"

namespace sfu::wire {

enum class RtcpKind { SR, SDES, RR, REMB, NACK, PLI };

struct ReportBlock {
  uint32_t ssrc = 0;
  double loss_fraction = 0.0;  // [0,1], wire-coded as fraction/256
  uint32_t cumulative_lost = 0;
  uint32_t highest_seq = 0;
  uint32_t jitter = 0;  // timestamp units

  bool operator==(const ReportBlock&) const = default;
};

struct RtcpMessage {
  RtcpKind kind = RtcpKind::RR;
  uint32_t sender_ssrc = 0;
  std::optional<uint32_t> media_ssrc;
  std::optional<uint64_t> remb_bps;
  std::vector<uint16_t> nack_seqs;
  std::vector<ReportBlock> report_blocks;
  // SR only
  uint64_t ntp_timestamp = 0;
  uint32_t rtp_timestamp = 0;
  uint32_t sender_packet_count = 0;
  uint32_t sender_octet_count = 0;
  // SDES only
  std::string cname;

  bool operator==(const RtcpMessage&) const = default;
};

// Splits a compound datagram into messages in order. Unknown packet types
// are skipped with a warning; truncation and bad lengths are fatal.
std::vector<RtcpMessage> parse_rtcp_compound(BytesView bytes);

Bytes serialize_rtcp(const RtcpMessage& m);
Bytes serialize_rtcp_compound(const std::vector<RtcpMessage>& msgs);

size_t rtcp_wire_size(const RtcpMessage& m);

// True when the first bytes look like an RTCP packet (PT 200..206) rather
// than RTP; the 4-bit lookahead the ingress pipeline takes on UDP payloads.
bool looks_like_rtcp(BytesView bytes);

}  // namespace sfu::wire

#endif  // SFU_WIRE_RTCP_HPP
