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

#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "sfu/wire/classify.hpp"

using namespace sfu;
using namespace sfu::wire;

namespace {

RtpPacket random_packet(std::mt19937_64& rng) {
  auto chance = [&](double p) {
    return std::uniform_real_distribution<double>(0, 1)(rng) < p;
  };
  auto pick = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  RtpPacket p;
  p.padding_flag = chance(0.2);
  p.marker = chance(0.3);
  p.payload_type = uint8_t(pick(0, 127));
  p.seq = uint16_t(pick(0, 65535));
  p.timestamp = uint32_t(rng());
  p.ssrc = uint32_t(rng());
  int csrcs = pick(0, 3);
  for (int i = 0; i < csrcs; ++i) p.csrcs.push_back(uint32_t(rng()));
  if (chance(0.7)) {
    p.extension_flag = true;
    bool two_byte = chance(0.4);
    p.extension_profile_raw = two_byte ? uint16_t(0x1000 | pick(0, 15)) : uint16_t(0xBEDE);
    int elements = pick(0, 8);
    for (int i = 0; i < elements; ++i) {
      ExtensionElement el;
      el.profile = two_byte ? ExtensionProfile::two_byte : ExtensionProfile::one_byte;
      if (chance(0.25)) {
        el.is_padding = true;
      } else if (two_byte) {
        el.id = uint8_t(pick(1, 255));
        el.data.resize(size_t(pick(0, 20)));
        for (auto& b : el.data) b = uint8_t(rng());
      } else {
        el.id = uint8_t(pick(1, 14));
        el.data.resize(size_t(pick(1, 16)));
        for (auto& b : el.data) b = uint8_t(rng());
      }
      p.extensions.push_back(std::move(el));
    }
    pad_extensions(p);
  }
  p.payload.resize(size_t(pick(0, 64)));
  for (auto& b : p.payload) b = uint8_t(rng());
  p.media_kind = p.payload_type == 111 ? MediaKind::audio : MediaKind::video;
  return p;
}

}  // namespace

TEST_SUITE("wire") {

TEST_CASE("rtp minimal header parses") {
  Bytes bytes = from_hex("80600102000000640001000161626364");
  RtpPacket p = parse_rtp(bytes);
  CHECK(p.version == 2);
  CHECK_FALSE(p.extension_flag);
  CHECK(p.payload_type == 96);
  CHECK(p.seq == 0x0102);
  CHECK(p.timestamp == 100);
  CHECK(p.ssrc == 0x00010001);
  CHECK(p.extensions.empty());
  CHECK(p.payload_len() == 4);
  CHECK(serialize_rtp(p) == bytes);
}

TEST_CASE("one-byte extensions with interleaved padding") {
  // [id=1 len=3][pad][id=5 len=2] fills two words exactly
  Bytes bytes = from_hex("906000010000000011223344bede000212aabbcc0051ddee");
  RtpPacket p = parse_rtp(bytes);
  REQUIRE(p.extension_flag);
  REQUIRE(p.extensions.size() == 3);
  CHECK(p.extensions[0].id == 1);
  CHECK(p.extensions[0].data == Bytes{0xAA, 0xBB, 0xCC});
  CHECK(p.extensions[1].is_padding);
  CHECK(p.extensions[2].id == 5);
  CHECK(p.extensions[2].data == Bytes{0xDD, 0xEE});
  CHECK(serialize_rtp(p) == bytes);
}

TEST_CASE("two-byte extension profile") {
  Bytes bytes = from_hex("90600002000000011122334410000002100201020000c800");
  RtpPacket p = parse_rtp(bytes);
  REQUIRE(p.extension_flag);
  CHECK(p.extension_profile_raw == 0x1000);
  REQUIRE(p.extensions.size() == 4);
  CHECK(p.extensions[0].id == 16);
  CHECK(p.extensions[0].data == Bytes{0x01, 0x02});
  CHECK(p.extensions[1].is_padding);
  CHECK(p.extensions[2].id == 200);
  CHECK(p.extensions[2].data.empty());
  CHECK(p.extensions[3].is_padding);
  CHECK(serialize_rtp(p) == bytes);
}

TEST_CASE("parse depth budget") {
  // 28 padding bytes = 28 parser states; the 28th exceeds the default 27
  ByteWriter w;
  w.raw(from_hex("906000030000000000000099"));
  w.u16(0xBEDE);
  w.u16(7);
  w.zeros(28);
  CHECK_THROWS_AS(parse_rtp(w.bytes()), ParseError);
  try {
    parse_rtp(w.bytes());
    FAIL("expected DepthExceeded");
  } catch (const ParseError& e) {
    CHECK(e.code() == WireError::DepthExceeded);
  }
  CHECK(parse_rtp(w.bytes(), 28).extensions.size() == 28);
}

TEST_CASE("depth budget boundary is exact") {
  for (unsigned k = 4; k <= 28; k += 4) {
    ByteWriter w;
    w.raw(from_hex("906000040000000000000099"));
    w.u16(0xBEDE);
    w.u16(uint16_t(k / 4));
    w.zeros(k);
    CHECK(parse_rtp(w.bytes(), k).extensions.size() == k);
    CHECK_THROWS_AS(parse_rtp(w.bytes(), k - 1), ParseError);
  }
}

TEST_CASE("truncated header") {
  CHECK_THROWS_AS(parse_rtp(from_hex("806001020000")), ParseError);
}

TEST_CASE("round-trip property over random packets") {
  std::mt19937_64 rng(0xC0FFEE);
  for (int i = 0; i < 10000; ++i) {
    RtpPacket p = random_packet(rng);
    Bytes bytes = serialize_rtp(p);
    RtpPacket q = parse_rtp(bytes, kDefaultMaxParseDepth);
    CHECK(q == p);
    CHECK(serialize_rtp(q) == bytes);
    CHECK(rtp_wire_size(p) == bytes.size());
  }
}

TEST_CASE("seq boundary survives round trip") {
  RtpPacket p;
  p.seq = 65535;
  p.payload = {1, 2, 3};
  CHECK(parse_rtp(serialize_rtp(p)).seq == 65535);
}

TEST_CASE("rewritten seq changes exactly two bytes at offset 2") {
  RtpPacket p;
  p.seq = 0x1234;
  p.payload = {9, 9, 9, 9};
  Bytes before = serialize_rtp(p);
  p.seq = 0x1232;
  Bytes after = serialize_rtp(p);
  REQUIRE(before.size() == after.size());
  for (size_t i = 0; i < before.size(); ++i) {
    if (i == 2 || i == 3) continue;
    CHECK(before[i] == after[i]);
  }
  CHECK(((after[2] << 8) | after[3]) == 0x1232);
}

TEST_CASE("av1 descriptor mandatory fields") {
  Av1Descriptor d;
  d.template_id = 3;
  d.frame_number = 7;
  d.start_of_frame = true;
  d.end_of_frame = true;
  ExtensionElement el = make_av1_extension(d, 12);
  CHECK(el.data.size() == 3);
  Av1Descriptor back = parse_av1_descriptor(el, 12);
  CHECK(back == d);
}

TEST_CASE("av1 descriptor extended structure") {
  Av1Descriptor d;
  d.start_of_frame = true;
  d.has_extended_structure = true;
  TemplateStructure ts;
  ts.template_to_layer = {{0, 0}, {1, 0}, {2, 1}, {3, 2}, {4, 2}};
  ts.decode_target_count = 3;
  d.extended = ts;
  Av1Descriptor back = parse_av1_descriptor(make_av1_extension(d, 12), 12);
  REQUIRE(back.has_extended_structure);
  REQUIRE(back.extended.has_value());
  CHECK(back.extended->template_to_layer == ts.template_to_layer);
  for (uint8_t t = 0; t <= 4; ++t) CHECK(back.extended->template_to_layer.count(t) == 1);
}

TEST_CASE("av1 descriptor errors") {
  ExtensionElement el;
  el.id = 12;
  CHECK_THROWS_AS(parse_av1_descriptor(el, 12), ParseError);  // empty data
  el.id = 3;
  el.data = {0, 0, 0};
  CHECK_THROWS_AS(parse_av1_descriptor(el, 12), ParseError);  // wrong id
}

TEST_CASE("rtcp single RR") {
  RtcpMessage rr;
  rr.kind = RtcpKind::RR;
  rr.sender_ssrc = 42;
  ReportBlock b;
  b.ssrc = 7;
  b.loss_fraction = 0.25;
  b.jitter = 16;
  rr.report_blocks.push_back(b);
  auto msgs = parse_rtcp_compound(serialize_rtcp(rr));
  REQUIRE(msgs.size() == 1);
  CHECK(msgs[0].kind == RtcpKind::RR);
  CHECK(msgs[0].report_blocks.size() == 1);
  CHECK(msgs[0].report_blocks[0].loss_fraction == doctest::Approx(0.25));
}

TEST_CASE("rtcp RR followed by REMB, hand-encoded") {
  Bytes bytes = from_hex(
      "81c90007000000010001000140000005000012340000001000000000000000008fce000500000001"
      "0000000052454d42010fd09000010001");
  auto msgs = parse_rtcp_compound(bytes);
  REQUIRE(msgs.size() == 2);
  CHECK(msgs[0].kind == RtcpKind::RR);
  CHECK(msgs[0].sender_ssrc == 1);
  CHECK(msgs[0].report_blocks.size() == 1);
  CHECK(msgs[0].report_blocks[0].loss_fraction == doctest::Approx(0x40 / 256.0));
  CHECK(msgs[1].kind == RtcpKind::REMB);
  CHECK(msgs[1].remb_bps == 2'000'000);
  CHECK(msgs[1].media_ssrc == 0x00010001);
  auto again = parse_rtcp_compound(serialize_rtcp_compound(msgs));
  REQUIRE(again.size() == 2);
  CHECK(again[1].remb_bps == 2'000'000);
}

TEST_CASE("rtcp SR plus SDES compound") {
  Bytes bytes = from_hex(
      "80c800060000000100000001000000020000016800000064000003e8"
      "81ca00030000000101047030303100 00");
  auto msgs = parse_rtcp_compound(bytes);
  REQUIRE(msgs.size() == 2);
  CHECK(msgs[0].kind == RtcpKind::SR);
  CHECK(msgs[0].ntp_timestamp == 0x0000000100000002ULL);
  CHECK(msgs[0].rtp_timestamp == 0x168);
  CHECK(msgs[1].kind == RtcpKind::SDES);
  CHECK(msgs[1].cname == "p001");
}

TEST_CASE("rtcp unknown type skipped, not fatal") {
  RtcpMessage rr;
  rr.kind = RtcpKind::RR;
  rr.sender_ssrc = 1;
  ByteWriter bye;  // BYE (203) spliced between two known packets
  bye.u8(0x80);
  bye.u8(203);
  bye.u16(1);
  bye.u32(1);
  RtcpMessage pli;
  pli.kind = RtcpKind::PLI;
  pli.sender_ssrc = 2;
  pli.media_ssrc = 3;
  ByteWriter all;
  all.raw(serialize_rtcp(rr));
  all.raw(bye.bytes());
  all.raw(serialize_rtcp(pli));
  auto msgs = parse_rtcp_compound(all.bytes());
  REQUIRE(msgs.size() == 2);
  CHECK(msgs[0].kind == RtcpKind::RR);
  CHECK(msgs[1].kind == RtcpKind::PLI);
}

TEST_CASE("rtcp truncation is fatal") {
  CHECK_THROWS_AS(parse_rtcp_compound(from_hex("81c90007000000010001")), ParseError);
  CHECK_THROWS_AS(parse_rtcp_compound(from_hex("80c800")), ParseError);
}

TEST_CASE("nack sequence packing round trip") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    RtcpMessage nack;
    nack.kind = RtcpKind::NACK;
    nack.sender_ssrc = 5;
    nack.media_ssrc = 6;
    uint16_t base = uint16_t(rng());
    int n = 1 + int(rng() % 20);
    std::set<uint16_t> want;
    uint16_t s = base;
    for (int i = 0; i < n; ++i) {
      s = uint16_t(s + 1 + rng() % 9);
      want.insert(s);
    }
    nack.nack_seqs.assign(want.begin(), want.end());
    auto msgs = parse_rtcp_compound(serialize_rtcp(nack));
    REQUIRE(msgs.size() == 1);
    std::set<uint16_t> got(msgs[0].nack_seqs.begin(), msgs[0].nack_seqs.end());
    CHECK(got == want);
    CHECK(rtcp_wire_size(nack) == serialize_rtcp(nack).size());
  }
}

TEST_CASE("stun sample request parses and verifies") {
  // RFC 5769 section 2.1
  Bytes req = from_hex(
      "000100582112a442b7e7a701bc34d686fa87dfae"
      "8022001053545"
      "54e207465737420636c69656e74"
      "002400046e0001ff"
      "80290008932ff9b151263b36"
      "000600096576746a3a68367659202020"
      "000800149aeaa70cbfd8cb56781ef2b5b2d3f249c1b571a2"
      "80280004e57a3bcf");
  CHECK(looks_like_stun(req));
  StunMessage m = parse_stun(req);
  CHECK(m.kind == StunKind::binding_request);
  CHECK(m.message_integrity_present);
  CHECK(m.attributes.size() == 6);
  CHECK(verify_message_integrity(req, "VOkJxbRl1RmTxUk/WvJxBt"));
  CHECK_FALSE(verify_message_integrity(req, "wrong-password"));
  CHECK(serialize_stun(m) == req);
  CHECK(stun_wire_size(m) == req.size());
}

TEST_CASE("stun sample response carries the xor-mapped address") {
  // RFC 5769 section 2.2
  Bytes resp = from_hex(
      "0101003c2112a442b7e7a701bc34d686fa87dfae"
      "8022000b7465737420766563746f7220"
      "002000080001a147e112a643"
      "000800142b91f599fd9e90c38c7489f92af9ba53f06be7d7"
      "80280004c07d4c96");
  StunMessage m = parse_stun(resp);
  CHECK(m.kind == StunKind::binding_response);
  REQUIRE(m.xor_mapped_address.has_value());
  CHECK(m.xor_mapped_address->ip == 0xC0000201);  // 192.0.2.1
  CHECK(m.xor_mapped_address->port == 32853);
  CHECK(endpoint_to_string(*m.xor_mapped_address) == "192.0.2.1:32853");
  CHECK(verify_message_integrity(resp, "VOkJxbRl1RmTxUk/WvJxBt"));
  CHECK(serialize_stun(m) == resp);
}

TEST_CASE("binding response builder matches the rfc attribute layout") {
  std::array<uint8_t, 12> txid{0xb7, 0xe7, 0xa7, 0x01, 0xbc, 0x34, 0xd6, 0x86,
                               0xfa, 0x87, 0xdf, 0xae};
  Bytes resp = build_binding_response(txid, {0xC0000201, 32853});
  StunMessage m = parse_stun(resp);
  REQUIRE(m.xor_mapped_address.has_value());
  CHECK(m.xor_mapped_address->port == 32853);
  CHECK(m.transaction_id == txid);
  REQUIRE(m.attributes.size() == 1);
  ByteWriter w;
  w.u16(m.attributes[0].type);
  w.u16(uint16_t(m.attributes[0].value.size()));
  w.raw(m.attributes[0].value);
  CHECK(w.bytes() == from_hex("002000080001a147e112a643"));
}

TEST_CASE("binding request with message integrity verifies") {
  std::array<uint8_t, 12> txid{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  Bytes req = build_binding_request(txid, "secret");
  CHECK(verify_message_integrity(req, "secret"));
  CHECK_FALSE(verify_message_integrity(req, "other"));
  CHECK(parse_stun(req).message_integrity_present);
}

TEST_CASE("classification routes") {
  StreamRegistry reg;

  RtpPacket video;
  video.payload_type = 96;
  video.media_kind = MediaKind::video;
  video.extension_flag = true;
  Av1Descriptor dd;
  dd.template_id = 2;
  dd.frame_number = 9;
  video.extensions.push_back(make_av1_extension(dd, 12));
  pad_extensions(video);
  CHECK(classify(video, reg) == PlaneRoute::data_plane);

  dd.has_extended_structure = true;
  TemplateStructure ts;
  ts.template_to_layer = {{0, 0}, {1, 0}, {2, 1}, {3, 2}, {4, 2}};
  dd.extended = ts;
  RtpPacket key = video;
  key.extensions.clear();
  key.extensions.push_back(make_av1_extension(dd, 12));
  pad_extensions(key);
  CHECK(classify(key, reg) == PlaneRoute::data_plane_with_copy_to_agent);

  RtpPacket audio;
  audio.payload_type = 111;
  audio.media_kind = MediaKind::audio;
  CHECK(classify(audio, reg) == PlaneRoute::data_plane);

  std::vector<RtcpMessage> sr(2);
  sr[0].kind = RtcpKind::SR;
  sr[1].kind = RtcpKind::SDES;
  CHECK(classify(sr, reg) == PlaneRoute::data_plane);

  std::vector<RtcpMessage> remb(2);
  remb[0].kind = RtcpKind::RR;
  remb[1].kind = RtcpKind::REMB;
  remb[1].remb_bps = 1000000;
  CHECK(classify(remb, reg) == PlaneRoute::data_plane_with_copy_to_agent);

  StunMessage stun;
  CHECK(classify(stun, reg) == PlaneRoute::control_plane_only);
}

TEST_CASE("parse_and_classify dispatches by lookahead") {
  Bytes rtp = from_hex("80600102000000640001000161626364");
  CHECK(std::holds_alternative<RtpPacket>(parse_and_classify(rtp).packet));
  RtcpMessage pli;
  pli.kind = RtcpKind::PLI;
  pli.media_ssrc = 1;
  CHECK(parse_and_classify(serialize_rtcp(pli)).route ==
        PlaneRoute::data_plane_with_copy_to_agent);
  std::array<uint8_t, 12> txid{};
  CHECK(parse_and_classify(build_binding_request(txid)).route ==
        PlaneRoute::control_plane_only);
}

}  // TEST_SUITE
