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

#ifndef SFU_WIRE_STUN_HPP
#define SFU_WIRE_STUN_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sfu/util/bytes.hpp"
#include "sfu/wire/rtp.hpp"

namespace sfu::wire {

struct Endpoint {
  uint32_t ip = 0;  // IPv4, host order
  uint16_t port = 0;

  bool operator==(const Endpoint&) const = default;
  auto operator<=>(const Endpoint&) const = default;
};

std::string endpoint_to_string(const Endpoint& ep);

enum class StunKind { binding_request, binding_response };

struct StunAttribute {
  uint16_t type = 0;
  Bytes value;
  Bytes pad;  // observed alignment bytes; not always zero on the wire

  bool operator==(const StunAttribute&) const = default;
};

struct StunMessage {
  StunKind kind = StunKind::binding_request;
  std::array<uint8_t, 12> transaction_id{};
  std::optional<Endpoint> xor_mapped_address;
  bool message_integrity_present = false;
  // raw attribute list in wire order, so parse/serialize reproduce exactly
  std::vector<StunAttribute> attributes;

  bool operator==(const StunMessage&) const = default;
};

bool looks_like_stun(BytesView bytes);

StunMessage parse_stun(BytesView bytes);
Bytes serialize_stun(const StunMessage& m);

// Builds a binding message from scratch. A non-empty password appends
// MESSAGE-INTEGRITY (HMAC-SHA1, short-term credentials).
Bytes build_binding_request(const std::array<uint8_t, 12>& txid,
                            const std::string& password = {});
Bytes build_binding_response(const std::array<uint8_t, 12>& txid, const Endpoint& mapped,
                             const std::string& password = {});

// Verifies MESSAGE-INTEGRITY over the original wire bytes.
bool verify_message_integrity(BytesView bytes, const std::string& password);

size_t stun_wire_size(const StunMessage& m);

}  // namespace sfu::wire

#endif  // SFU_WIRE_STUN_HPP
