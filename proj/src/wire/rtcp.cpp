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

#include "sfu/wire/rtcp.hpp"

#include <algorithm>
#include <cmath>

#include "sfu/util/log.hpp"

namespace sfu::wire {

namespace {

constexpr uint8_t kPtSr = 200;
constexpr uint8_t kPtRr = 201;
constexpr uint8_t kPtSdes = 202;
constexpr uint8_t kPtRtpFb = 205;  // transport-layer FB; FMT 1 = NACK
constexpr uint8_t kPtPsFb = 206;   // payload-specific FB; FMT 1 = PLI, 15 = ALFB (REMB)

ReportBlock parse_report_block(ByteReader& r) {
  ReportBlock b;
  b.ssrc = r.u32();
  uint32_t word = r.u32();
  b.loss_fraction = double(word >> 24) / 256.0;
  b.cumulative_lost = word & 0xFFFFFF;
  b.highest_seq = r.u32();
  b.jitter = r.u32();
  r.skip(8);  // LSR + DLSR
  return b;
}

void write_report_block(ByteWriter& w, const ReportBlock& b) {
  w.u32(b.ssrc);
  uint32_t frac = uint32_t(std::lround(b.loss_fraction * 256.0));
  frac = std::min<uint32_t>(frac, 255);
  w.u32((frac << 24) | (b.cumulative_lost & 0xFFFFFF));
  w.u32(b.highest_seq);
  w.u32(b.jitter);
  w.u32(0);
  w.u32(0);
}

RtcpMessage parse_one(uint8_t fmt, uint8_t pt, ByteReader& r, size_t body_len) {
  RtcpMessage m;
  switch (pt) {
    case kPtSr: {
      m.kind = RtcpKind::SR;
      m.sender_ssrc = r.u32();
      m.ntp_timestamp = r.u64();
      m.rtp_timestamp = r.u32();
      m.sender_packet_count = r.u32();
      m.sender_octet_count = r.u32();
      for (uint8_t i = 0; i < fmt; ++i) m.report_blocks.push_back(parse_report_block(r));
      return m;
    }
    case kPtRr: {
      m.kind = RtcpKind::RR;
      m.sender_ssrc = r.u32();
      for (uint8_t i = 0; i < fmt; ++i) m.report_blocks.push_back(parse_report_block(r));
      return m;
    }
    case kPtSdes: {
      m.kind = RtcpKind::SDES;
      m.sender_ssrc = r.u32();
      // single chunk, CNAME item only
      size_t consumed = 4;
      while (consumed < body_len) {
        uint8_t item = r.u8();
        ++consumed;
        if (item == 0) break;  // end of item list
        uint8_t len = r.u8();
        ++consumed;
        Bytes text = r.take(len);
        consumed += len;
        if (item == 1) m.cname.assign(text.begin(), text.end());
      }
      if (consumed < body_len) r.skip(body_len - consumed);  // chunk alignment
      return m;
    }
    case kPtRtpFb: {
      if (fmt != 1) throw ParseError(WireError::UnknownPacketType, "RTPFB fmt not NACK");
      m.kind = RtcpKind::NACK;
      m.sender_ssrc = r.u32();
      m.media_ssrc = r.u32();
      size_t fci_count = (body_len - 8) / 4;
      for (size_t i = 0; i < fci_count; ++i) {
        uint16_t pid = r.u16();
        uint16_t blp = r.u16();
        m.nack_seqs.push_back(pid);
        for (int bit = 0; bit < 16; ++bit) {
          if (blp & (1u << bit)) m.nack_seqs.push_back(uint16_t(pid + bit + 1));
        }
      }
      if (m.nack_seqs.empty()) {
        throw ParseError(WireError::TruncatedCompound, "NACK without sequence numbers");
      }
      return m;
    }
    case kPtPsFb: {
      m.sender_ssrc = r.u32();
      uint32_t media = r.u32();
      if (fmt == 1) {
        m.kind = RtcpKind::PLI;
        m.media_ssrc = media;
        return m;
      }
      if (fmt == 15) {
        // application-layer FB, identifier "REMB"
        Bytes ident = r.take(4);
        if (!(ident[0] == 'R' && ident[1] == 'E' && ident[2] == 'M' && ident[3] == 'B')) {
          throw ParseError(WireError::UnknownPacketType, "ALFB identifier not REMB");
        }
        m.kind = RtcpKind::REMB;
        uint8_t num_ssrc = r.u8();
        uint8_t b1 = r.u8();
        uint16_t lo = r.u16();
        uint8_t exponent = b1 >> 2;
        uint32_t mantissa = (uint32_t(b1 & 0x03) << 16) | lo;
        m.remb_bps = uint64_t(mantissa) << exponent;
        for (uint8_t i = 0; i < num_ssrc; ++i) {
          uint32_t ssrc = r.u32();
          if (i == 0) m.media_ssrc = ssrc;
        }
        if (*m.remb_bps == 0) {
          throw ParseError(WireError::TruncatedCompound, "REMB with zero bitrate");
        }
        return m;
      }
      throw ParseError(WireError::UnknownPacketType, "PSFB fmt not PLI or REMB");
    }
    default:
      throw ParseError(WireError::UnknownPacketType, "unknown RTCP packet type");
  }
}

}  // namespace

std::vector<RtcpMessage> parse_rtcp_compound(BytesView bytes) {
  if (bytes.size() % 4 != 0) {
    throw ParseError(WireError::TruncatedCompound, "compound length not a multiple of 4");
  }
  std::vector<RtcpMessage> out;
  size_t offset = 0;
  while (offset < bytes.size()) {
    if (bytes.size() - offset < 4) {
      throw ParseError(WireError::TruncatedCompound, "truncated RTCP header");
    }
    uint8_t b0 = bytes[offset];
    if ((b0 >> 6) != 2) {
      throw ParseError(WireError::TruncatedCompound, "RTCP version must be 2");
    }
    uint8_t fmt = b0 & 0x1F;
    uint8_t pt = bytes[offset + 1];
    size_t len_words = (size_t(bytes[offset + 2]) << 8) | bytes[offset + 3];
    size_t total = (len_words + 1) * 4;
    if (offset + total > bytes.size()) {
      throw ParseError(WireError::TruncatedCompound, "RTCP length field exceeds datagram");
    }
    ByteReader body(bytes.subspan(offset + 4, total - 4));
    try {
      out.push_back(parse_one(fmt, pt, body, total - 4));
    } catch (const ParseError& e) {
      if (e.code() != WireError::UnknownPacketType) throw;
      log::warn(std::string("skipping RTCP packet: ") + e.what());
    } catch (const std::out_of_range&) {
      throw ParseError(WireError::TruncatedCompound, "RTCP body shorter than declared");
    }
    offset += total;
  }
  return out;
}

namespace {

void append_word_count(ByteWriter& w, size_t header_offset, size_t start) {
  size_t body = w.size() - start;
  w.patch_u16(header_offset, uint16_t(body / 4 - 1));
}

}  // namespace

Bytes serialize_rtcp(const RtcpMessage& m) {
  ByteWriter w;
  size_t start = 0;
  auto header = [&](uint8_t fmt, uint8_t pt) {
    w.u8(uint8_t(0x80 | (fmt & 0x1F)));
    w.u8(pt);
    w.u16(0);  // patched below
  };
  switch (m.kind) {
    case RtcpKind::SR:
      header(uint8_t(m.report_blocks.size()), kPtSr);
      w.u32(m.sender_ssrc);
      w.u64(m.ntp_timestamp);
      w.u32(m.rtp_timestamp);
      w.u32(m.sender_packet_count);
      w.u32(m.sender_octet_count);
      for (const auto& b : m.report_blocks) write_report_block(w, b);
      break;
    case RtcpKind::RR:
      header(uint8_t(m.report_blocks.size()), kPtRr);
      w.u32(m.sender_ssrc);
      for (const auto& b : m.report_blocks) write_report_block(w, b);
      break;
    case RtcpKind::SDES: {
      header(1, kPtSdes);
      w.u32(m.sender_ssrc);
      w.u8(1);  // CNAME
      w.u8(uint8_t(m.cname.size()));
      w.raw(BytesView(reinterpret_cast<const uint8_t*>(m.cname.data()), m.cname.size()));
      w.u8(0);  // end of items
      while ((w.size() - start) % 4 != 0) w.u8(0);
      break;
    }
    case RtcpKind::NACK: {
      if (m.nack_seqs.empty()) {
        throw ParseError(WireError::FieldOverflow, "NACK needs sequence numbers");
      }
      header(1, kPtRtpFb);
      w.u32(m.sender_ssrc);
      w.u32(m.media_ssrc.value_or(0));
      // pack sorted seqs into PID+BLP entries
      std::vector<uint16_t> seqs = m.nack_seqs;
      size_t i = 0;
      while (i < seqs.size()) {
        uint16_t pid = seqs[i];
        uint16_t blp = 0;
        size_t j = i + 1;
        while (j < seqs.size()) {
          uint16_t d = uint16_t(seqs[j] - pid);
          if (d == 0 || d > 16) break;
          blp |= uint16_t(1u << (d - 1));
          ++j;
        }
        w.u16(pid);
        w.u16(blp);
        i = j;
      }
      break;
    }
    case RtcpKind::PLI:
      header(1, kPtPsFb);
      w.u32(m.sender_ssrc);
      w.u32(m.media_ssrc.value_or(0));
      break;
    case RtcpKind::REMB: {
      uint64_t bps = m.remb_bps.value_or(0);
      if (bps == 0) throw ParseError(WireError::FieldOverflow, "REMB needs bitrate > 0");
      header(15, kPtPsFb);
      w.u32(m.sender_ssrc);
      w.u32(0);  // media source always zero in ALFB
      w.u8('R');
      w.u8('E');
      w.u8('M');
      w.u8('B');
      uint8_t exponent = 0;
      uint64_t mantissa = bps;
      while (mantissa >= (1u << 18)) {
        mantissa >>= 1;
        ++exponent;
      }
      w.u8(1);  // one feedback SSRC
      w.u8(uint8_t((exponent << 2) | ((mantissa >> 16) & 0x03)));
      w.u16(uint16_t(mantissa & 0xFFFF));
      w.u32(m.media_ssrc.value_or(0));
      break;
    }
  }
  append_word_count(w, start + 2, start);
  return w.take();
}

Bytes serialize_rtcp_compound(const std::vector<RtcpMessage>& msgs) {
  ByteWriter w;
  for (const auto& m : msgs) w.raw(serialize_rtcp(m));
  return w.take();
}

size_t rtcp_wire_size(const RtcpMessage& m) {
  switch (m.kind) {
    case RtcpKind::SR: return 28 + 24 * m.report_blocks.size();
    case RtcpKind::RR: return 8 + 24 * m.report_blocks.size();
    case RtcpKind::SDES: {
      size_t items = 4 + 2 + m.cname.size() + 1;
      return 4 + ((items + 3) & ~size_t(3));
    }
    case RtcpKind::NACK: {
      // recompute the PID+BLP packing
      size_t entries = 0;
      size_t i = 0;
      while (i < m.nack_seqs.size()) {
        uint16_t pid = m.nack_seqs[i];
        size_t j = i + 1;
        while (j < m.nack_seqs.size()) {
          uint16_t d = uint16_t(m.nack_seqs[j] - pid);
          if (d == 0 || d > 16) break;
          ++j;
        }
        ++entries;
        i = j;
      }
      return 12 + 4 * entries;
    }
    case RtcpKind::PLI: return 12;
    case RtcpKind::REMB: return 24;
  }
  return 0;
}

bool looks_like_rtcp(BytesView bytes) {
  if (bytes.size() < 2) return false;
  if ((bytes[0] >> 6) != 2) return false;
  uint8_t pt = bytes[1];
  return pt >= 200 && pt <= 206;
}

}  // namespace sfu::wire
