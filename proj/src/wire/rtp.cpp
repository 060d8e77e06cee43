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

#include "sfu/wire/rtp.hpp"

namespace sfu::wire {

namespace {

constexpr uint16_t kOneByteProfile = 0xBEDE;

bool is_two_byte_profile(uint16_t profile) {
  // RFC 8285 "defined by profile" pattern 0x100X for the two-byte form
  return (profile & 0xFFF0) == 0x1000;
}

// One extension block element per recursion state; padding bytes get their
// own state, matching the interleaved padding/extension parse trees.
std::vector<ExtensionElement> parse_extension_block(BytesView block, uint16_t profile,
                                                    unsigned max_depth) {
  std::vector<ExtensionElement> out;
  const bool two_byte = is_two_byte_profile(profile);
  ByteReader r(block);
  while (!r.empty()) {
    if (out.size() >= max_depth) {
      throw ParseError(WireError::DepthExceeded, "extension element count exceeds parse depth");
    }
    uint8_t head = r.u8();
    if (head == 0) {
      ExtensionElement pad;
      pad.profile = two_byte ? ExtensionProfile::two_byte : ExtensionProfile::one_byte;
      pad.is_padding = true;
      out.push_back(std::move(pad));
      continue;
    }
    ExtensionElement el;
    if (two_byte) {
      el.profile = ExtensionProfile::two_byte;
      el.id = head;
      if (r.empty()) {
        throw ParseError(WireError::MalformedExtension, "two-byte element missing length");
      }
      uint8_t len = r.u8();
      if (r.remaining() < len) {
        throw ParseError(WireError::MalformedExtension, "extension data exceeds block");
      }
      el.data = r.take(len);
    } else {
      el.profile = ExtensionProfile::one_byte;
      el.id = head >> 4;
      if (el.id == 15) {
        throw ParseError(WireError::MalformedExtension, "reserved one-byte extension id 15");
      }
      size_t len = size_t(head & 0x0F) + 1;
      if (r.remaining() < len) {
        throw ParseError(WireError::MalformedExtension, "extension data exceeds block");
      }
      el.data = r.take(len);
    }
    out.push_back(std::move(el));
  }
  return out;
}

}  // namespace

RtpPacket parse_rtp(BytesView bytes, unsigned max_depth, const RtpParseContext& ctx) {
  if (bytes.size() < 12) {
    throw ParseError(WireError::TruncatedHeader, "RTP header needs 12 bytes");
  }
  if (max_depth < 1) {
    throw ParseError(WireError::DepthExceeded, "max_depth must be at least 1");
  }
  ByteReader r(bytes);
  RtpPacket p;
  uint8_t b0 = r.u8();
  p.version = b0 >> 6;
  if (p.version != 2) {
    throw ParseError(WireError::TruncatedHeader, "RTP version must be 2");
  }
  p.padding_flag = (b0 & 0x20) != 0;
  p.extension_flag = (b0 & 0x10) != 0;
  uint8_t csrc_count = b0 & 0x0F;
  uint8_t b1 = r.u8();
  p.marker = (b1 & 0x80) != 0;
  p.payload_type = b1 & 0x7F;
  p.seq = r.u16();
  p.timestamp = r.u32();
  p.ssrc = r.u32();
  try {
    for (uint8_t i = 0; i < csrc_count; ++i) p.csrcs.push_back(r.u32());
    if (p.extension_flag) {
      p.extension_profile_raw = r.u16();
      size_t block_len = size_t(r.u16()) * 4;
      Bytes block = r.take(block_len);
      if (p.extension_profile_raw != kOneByteProfile &&
          !is_two_byte_profile(p.extension_profile_raw)) {
        throw ParseError(WireError::MalformedExtension, "unknown extension profile");
      }
      p.extensions = parse_extension_block(block, p.extension_profile_raw, max_depth);
    }
  } catch (const std::out_of_range&) {
    throw ParseError(WireError::TruncatedHeader, "truncated RTP header");
  }
  p.payload = r.take(r.remaining());
  p.media_kind = ctx.audio_payload_types.count(p.payload_type) ? MediaKind::audio
                                                               : MediaKind::video;
  return p;
}

namespace {

size_t extension_block_payload_size(const RtpPacket& p) {
  size_t n = 0;
  for (const auto& el : p.extensions) {
    if (el.is_padding) {
      n += 1;
    } else if (el.profile == ExtensionProfile::two_byte) {
      n += 2 + el.data.size();
    } else {
      n += 1 + el.data.size();
    }
  }
  return n;
}

void check_extension_fields(const RtpPacket& p) {
  const bool two_byte = is_two_byte_profile(p.extension_profile_raw);
  if (!two_byte && p.extension_profile_raw != kOneByteProfile) {
    throw ParseError(WireError::FieldOverflow, "extension profile not one-byte or two-byte");
  }
  for (const auto& el : p.extensions) {
    if (el.is_padding) continue;
    if (two_byte) {
      if (el.id < 1 || el.data.size() > 255) {
        throw ParseError(WireError::FieldOverflow, "two-byte element out of range");
      }
    } else {
      if (el.id < 1 || el.id > 14 || el.data.empty() || el.data.size() > 16) {
        throw ParseError(WireError::FieldOverflow, "one-byte element out of range");
      }
    }
  }
}

}  // namespace

Bytes serialize_rtp(const RtpPacket& p) {
  if (p.version != 2) throw ParseError(WireError::FieldOverflow, "version must be 2");
  if (p.payload_type > 127) throw ParseError(WireError::FieldOverflow, "payload type > 127");
  if (p.csrcs.size() > 15) throw ParseError(WireError::FieldOverflow, "more than 15 CSRCs");
  if (p.extension_flag) check_extension_fields(p);

  ByteWriter w;
  uint8_t b0 = uint8_t(p.version << 6);
  if (p.padding_flag) b0 |= 0x20;
  if (p.extension_flag) b0 |= 0x10;
  b0 |= uint8_t(p.csrcs.size());
  w.u8(b0);
  w.u8(uint8_t((p.marker ? 0x80 : 0) | p.payload_type));
  w.u16(p.seq);
  w.u32(p.timestamp);
  w.u32(p.ssrc);
  for (uint32_t c : p.csrcs) w.u32(c);

  if (p.extension_flag) {
    size_t payload_size = extension_block_payload_size(p);
    size_t padded = (payload_size + 3) & ~size_t(3);
    if (padded / 4 > 0xFFFF) {
      throw ParseError(WireError::FieldOverflow, "extension block too large");
    }
    w.u16(p.extension_profile_raw);
    w.u16(uint16_t(padded / 4));
    for (const auto& el : p.extensions) {
      if (el.is_padding) {
        w.u8(0);
      } else if (el.profile == ExtensionProfile::two_byte) {
        w.u8(el.id);
        w.u8(uint8_t(el.data.size()));
        w.raw(el.data);
      } else {
        w.u8(uint8_t((el.id << 4) | (el.data.size() - 1)));
        w.raw(el.data);
      }
    }
    w.zeros(padded - payload_size);
  }
  w.raw(p.payload);
  return w.take();
}

void pad_extensions(RtpPacket& p) {
  if (!p.extension_flag) return;
  ExtensionElement pad;
  pad.profile = is_two_byte_profile(p.extension_profile_raw) ? ExtensionProfile::two_byte
                                                             : ExtensionProfile::one_byte;
  pad.is_padding = true;
  while (extension_block_payload_size(p) % 4 != 0) p.extensions.push_back(pad);
}

size_t rtp_wire_size(const RtpPacket& p) {
  size_t n = 12 + 4 * p.csrcs.size();
  if (p.extension_flag) {
    n += 4 + ((extension_block_payload_size(p) + 3) & ~size_t(3));
  }
  return n + p.payload.size();
}

}  // namespace sfu::wire
