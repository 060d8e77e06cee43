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

#ifndef SFU_WIRE_AV1_HPP
#define SFU_WIRE_AV1_HPP

#include <cstdint>
#include <map>
#include <optional>

#include "sfu/wire/rtp.hpp"

namespace sfu::wire {

// Template-id to temporal-layer table shipped with key frames. A stream's
// later packets reference only ids present here.
struct TemplateStructure {
  std::map<uint8_t, uint8_t> template_to_layer;  // template id -> layer in {0,1,2}
  uint8_t decode_target_count = 3;

  bool operator==(const TemplateStructure&) const = default;
};

// Dependency-descriptor extension carried on every media packet. The
// mandatory part is the 3-byte prefix: start/end flags, template id, frame
// number. Key-frame packets additionally carry the template structure.
//
// Extended layout used here (a compact table, not the full chain/DTI
// grammar): flags byte (bit 7 = structure present), decode-target count,
// template count N, then N layer bytes for template ids 0..N-1.
struct Av1Descriptor {
  bool start_of_frame = false;
  bool end_of_frame = false;
  uint8_t template_id = 0;  // 0..63
  uint16_t frame_number = 0;
  bool has_extended_structure = false;
  std::optional<TemplateStructure> extended;

  bool operator==(const Av1Descriptor&) const = default;
};

Av1Descriptor parse_av1_descriptor(const ExtensionElement& ext, uint8_t expected_id = 12);

// Builds the extension element (one-byte profile) for the given descriptor.
ExtensionElement make_av1_extension(const Av1Descriptor& d, uint8_t ext_id = 12);

Bytes encode_av1_descriptor(const Av1Descriptor& d);

}  // namespace sfu::wire

#endif  // SFU_WIRE_AV1_HPP
