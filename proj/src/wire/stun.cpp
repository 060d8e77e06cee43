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

#include "sfu/wire/stun.hpp"

#include <openssl/hmac.h>

#include <sstream>

namespace sfu::wire {

namespace {

constexpr uint32_t kMagicCookie = 0x2112A442;
constexpr uint16_t kBindingRequest = 0x0001;
constexpr uint16_t kBindingResponse = 0x0101;
constexpr uint16_t kAttrXorMappedAddress = 0x0020;
constexpr uint16_t kAttrMessageIntegrity = 0x0008;

Bytes hmac_sha1(const std::string& key, BytesView data) {
  unsigned int len = 20;
  Bytes out(20);
  HMAC(EVP_sha1(), key.data(), int(key.size()), data.data(), data.size(), out.data(), &len);
  out.resize(len);
  return out;
}

Endpoint decode_xor_mapped(BytesView value, const std::array<uint8_t, 12>& txid) {
  (void)txid;  // IPv6 would XOR with cookie||txid; only IPv4 is modeled
  if (value.size() < 8) throw ParseError(WireError::MalformedStun, "XOR-MAPPED too short");
  if (value[1] != 0x01) throw ParseError(WireError::MalformedStun, "only IPv4 supported");
  Endpoint ep;
  ep.port = uint16_t(((value[2] << 8) | value[3]) ^ (kMagicCookie >> 16));
  uint32_t xaddr = (uint32_t(value[4]) << 24) | (uint32_t(value[5]) << 16) |
                   (uint32_t(value[6]) << 8) | value[7];
  ep.ip = xaddr ^ kMagicCookie;
  return ep;
}

Bytes encode_xor_mapped(const Endpoint& ep) {
  ByteWriter w;
  w.u8(0);
  w.u8(0x01);
  w.u16(uint16_t(ep.port ^ (kMagicCookie >> 16)));
  w.u32(ep.ip ^ kMagicCookie);
  return w.take();
}

}  // namespace

std::string endpoint_to_string(const Endpoint& ep) {
  std::ostringstream os;
  os << ((ep.ip >> 24) & 0xFF) << '.' << ((ep.ip >> 16) & 0xFF) << '.' << ((ep.ip >> 8) & 0xFF)
     << '.' << (ep.ip & 0xFF) << ':' << ep.port;
  return os.str();
}

bool looks_like_stun(BytesView bytes) {
  if (bytes.size() < 20) return false;
  if ((bytes[0] & 0xC0) != 0) return false;
  uint32_t cookie = (uint32_t(bytes[4]) << 24) | (uint32_t(bytes[5]) << 16) |
                    (uint32_t(bytes[6]) << 8) | bytes[7];
  return cookie == kMagicCookie;
}

StunMessage parse_stun(BytesView bytes) {
  if (!looks_like_stun(bytes)) {
    throw ParseError(WireError::MalformedStun, "not a STUN message");
  }
  ByteReader r(bytes);
  StunMessage m;
  uint16_t type = r.u16();
  if (type == kBindingRequest) {
    m.kind = StunKind::binding_request;
  } else if (type == kBindingResponse) {
    m.kind = StunKind::binding_response;
  } else {
    throw ParseError(WireError::MalformedStun, "not a binding request/response");
  }
  uint16_t length = r.u16();
  r.skip(4);  // magic cookie, checked above
  Bytes txid = r.take(12);
  std::copy(txid.begin(), txid.end(), m.transaction_id.begin());
  if (length != r.remaining()) {
    throw ParseError(WireError::MalformedStun, "length field mismatch");
  }
  try {
    while (!r.empty()) {
      StunAttribute attr;
      attr.type = r.u16();
      uint16_t alen = r.u16();
      attr.value = r.take(alen);
      attr.pad = r.take((4 - alen % 4) % 4);
      if (attr.type == kAttrXorMappedAddress) {
        m.xor_mapped_address = decode_xor_mapped(attr.value, m.transaction_id);
      } else if (attr.type == kAttrMessageIntegrity) {
        m.message_integrity_present = true;
      }
      m.attributes.push_back(std::move(attr));
    }
  } catch (const std::out_of_range&) {
    throw ParseError(WireError::MalformedStun, "truncated STUN attribute");
  }
  return m;
}

Bytes serialize_stun(const StunMessage& m) {
  ByteWriter w;
  w.u16(m.kind == StunKind::binding_request ? kBindingRequest : kBindingResponse);
  w.u16(0);  // patched below
  w.u32(kMagicCookie);
  w.raw(BytesView(m.transaction_id.data(), m.transaction_id.size()));
  for (const auto& attr : m.attributes) {
    w.u16(attr.type);
    w.u16(uint16_t(attr.value.size()));
    w.raw(attr.value);
    size_t need = (4 - attr.value.size() % 4) % 4;
    if (attr.pad.size() == need) {
      w.raw(attr.pad);
    } else {
      w.zeros(need);
    }
  }
  w.patch_u16(2, uint16_t(w.size() - 20));
  return w.take();
}

namespace {

Bytes build_binding(uint16_t type, const std::array<uint8_t, 12>& txid,
                    const std::optional<Endpoint>& mapped, const std::string& password) {
  ByteWriter w;
  w.u16(type);
  w.u16(0);
  w.u32(kMagicCookie);
  w.raw(BytesView(txid.data(), txid.size()));
  if (mapped.has_value()) {
    Bytes v = encode_xor_mapped(*mapped);
    w.u16(kAttrXorMappedAddress);
    w.u16(uint16_t(v.size()));
    w.raw(v);
  }
  if (!password.empty()) {
    // HMAC is computed with the length field covering the MI attribute
    w.patch_u16(2, uint16_t(w.size() - 20 + 24));
    Bytes digest = hmac_sha1(password, w.bytes());
    w.u16(kAttrMessageIntegrity);
    w.u16(20);
    w.raw(digest);
  }
  w.patch_u16(2, uint16_t(w.size() - 20));
  return w.take();
}

}  // namespace

Bytes build_binding_request(const std::array<uint8_t, 12>& txid, const std::string& password) {
  return build_binding(kBindingRequest, txid, std::nullopt, password);
}

Bytes build_binding_response(const std::array<uint8_t, 12>& txid, const Endpoint& mapped,
                             const std::string& password) {
  return build_binding(kBindingResponse, txid, mapped, password);
}

bool verify_message_integrity(BytesView bytes, const std::string& password) {
  if (bytes.size() < 20) return false;
  size_t offset = 20;
  while (offset + 4 <= bytes.size()) {
    uint16_t type = uint16_t((bytes[offset] << 8) | bytes[offset + 1]);
    uint16_t alen = uint16_t((bytes[offset + 2] << 8) | bytes[offset + 3]);
    size_t value_at = offset + 4;
    if (type == kAttrMessageIntegrity) {
      if (alen != 20 || value_at + 20 > bytes.size()) return false;
      // rewrite the length field as if the message ended at this attribute
      Bytes covered(bytes.begin(), bytes.begin() + offset);
      uint16_t adjusted = uint16_t(value_at + 20 - 20);
      covered[2] = uint8_t(adjusted >> 8);
      covered[3] = uint8_t(adjusted);
      Bytes expect = hmac_sha1(password, covered);
      return std::equal(expect.begin(), expect.end(), bytes.begin() + value_at);
    }
    offset = value_at + alen + (4 - alen % 4) % 4;
  }
  return false;
}

size_t stun_wire_size(const StunMessage& m) {
  size_t n = 20;
  for (const auto& attr : m.attributes) {
    n += 4 + attr.value.size() + (4 - attr.value.size() % 4) % 4;
  }
  return n;
}

}  // namespace sfu::wire
