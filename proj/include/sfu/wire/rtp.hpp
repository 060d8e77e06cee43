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

#ifndef SFU_WIRE_RTP_HPP
#define SFU_WIRE_RTP_HPP

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "sfu/util/bytes.hpp"

namespace sfu::wire {

enum class WireError {
  TruncatedHeader,
  DepthExceeded,
  MalformedExtension,
  FieldOverflow,
  TruncatedCompound,
  UnknownPacketType,
  NotAv1Extension,
  MalformedDescriptor,
  MalformedStun,
};

class ParseError : public std::runtime_error {
 public:
  ParseError(WireError code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  WireError code() const { return code_; }

 private:
  WireError code_;
};

enum class MediaKind { audio, video };
enum class ExtensionProfile { one_byte, two_byte };

// One element of an RTP header-extension block (RFC 8285). Padding bytes
// between elements are modeled as one element per 0x00 byte so the wire
// image is reproduced exactly, interleaving included.
struct ExtensionElement {
  ExtensionProfile profile = ExtensionProfile::one_byte;
  uint8_t id = 0;       // unset for padding
  Bytes data;           // declared-length payload; empty for padding
  bool is_padding = false;

  size_t length() const { return data.size(); }
  bool operator==(const ExtensionElement&) const = default;
};

struct RtpPacket {
  uint8_t version = 2;
  bool padding_flag = false;
  bool extension_flag = false;
  bool marker = false;
  uint8_t payload_type = 0;   // 7-bit
  uint16_t seq = 0;
  uint32_t timestamp = 0;
  uint32_t ssrc = 0;
  std::vector<uint32_t> csrcs;
  uint16_t extension_profile_raw = 0xBEDE;  // 0xBEDE or 0x100X
  std::vector<ExtensionElement> extensions;
  Bytes payload;
  MediaKind media_kind = MediaKind::video;

  size_t payload_len() const { return payload.size(); }
  bool operator==(const RtpPacket&) const = default;
};

struct RtpParseContext {
  std::set<uint8_t> audio_payload_types{111};
  uint8_t av1dd_extension_id = 12;
};

inline constexpr unsigned kDefaultMaxParseDepth = 27;

// max_depth bounds the number of extension elements (padding included),
// mirroring the unrolled parser-state budget of the hardware target.
RtpPacket parse_rtp(BytesView bytes, unsigned max_depth = kDefaultMaxParseDepth,
                    const RtpParseContext& ctx = {});

// Exact inverse of parse_rtp provided the extension elements' wire sizes sum
// to a multiple of 4; trailing alignment zeros are otherwise appended and
// surface as padding elements on re-parse. pad_extensions() restores the
// aligned form.
Bytes serialize_rtp(const RtpPacket& p);

// Appends explicit padding elements until the extension block is 32-bit
// aligned. No-op when the extension flag is clear.
void pad_extensions(RtpPacket& p);

// Wire size without materializing bytes; equals serialize_rtp(p).size().
size_t rtp_wire_size(const RtpPacket& p);

}  // namespace sfu::wire

#endif  // SFU_WIRE_RTP_HPP
