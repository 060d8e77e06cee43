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

#include "sfu/wire/av1.hpp"

namespace sfu::wire {

namespace {
constexpr uint8_t kStructurePresent = 0x80;
}

Av1Descriptor parse_av1_descriptor(const ExtensionElement& ext, uint8_t expected_id) {
  if (ext.is_padding || ext.id != expected_id) {
    throw ParseError(WireError::NotAv1Extension, "extension id does not carry AV1 DD");
  }
  if (ext.data.size() < 3) {
    throw ParseError(WireError::MalformedDescriptor, "descriptor needs 3 mandatory bytes");
  }
  ByteReader r(ext.data);
  Av1Descriptor d;
  uint8_t b0 = r.u8();
  d.start_of_frame = (b0 & 0x80) != 0;
  d.end_of_frame = (b0 & 0x40) != 0;
  d.template_id = b0 & 0x3F;
  d.frame_number = r.u16();
  if (r.empty()) return d;

  uint8_t flags = r.u8();
  if ((flags & kStructurePresent) == 0) return d;
  d.has_extended_structure = true;
  try {
    TemplateStructure ts;
    ts.decode_target_count = r.u8();
    uint8_t count = r.u8();
    for (uint8_t t = 0; t < count; ++t) {
      uint8_t layer = r.u8();
      if (layer > 2) {
        throw ParseError(WireError::MalformedDescriptor, "temporal layer out of range");
      }
      ts.template_to_layer[t] = layer;
    }
    d.extended = std::move(ts);
  } catch (const std::out_of_range&) {
    throw ParseError(WireError::MalformedDescriptor, "truncated template structure");
  }
  return d;
}

Bytes encode_av1_descriptor(const Av1Descriptor& d) {
  ByteWriter w;
  uint8_t b0 = uint8_t(d.template_id & 0x3F);
  if (d.start_of_frame) b0 |= 0x80;
  if (d.end_of_frame) b0 |= 0x40;
  w.u8(b0);
  w.u16(d.frame_number);
  if (d.has_extended_structure) {
    if (!d.extended.has_value()) {
      throw ParseError(WireError::MalformedDescriptor, "extended flag set without structure");
    }
    w.u8(kStructurePresent);
    w.u8(d.extended->decode_target_count);
    // template ids must be dense from zero for the table form
    uint8_t count = d.extended->template_to_layer.empty()
                        ? 0
                        : uint8_t(d.extended->template_to_layer.rbegin()->first + 1);
    w.u8(count);
    for (uint8_t t = 0; t < count; ++t) {
      auto it = d.extended->template_to_layer.find(t);
      w.u8(it == d.extended->template_to_layer.end() ? 0 : it->second);
    }
  }
  return w.take();
}

ExtensionElement make_av1_extension(const Av1Descriptor& d, uint8_t ext_id) {
  ExtensionElement el;
  el.id = ext_id;
  el.data = encode_av1_descriptor(d);
  el.profile = el.data.size() <= 16 ? ExtensionProfile::one_byte : ExtensionProfile::two_byte;
  return el;
}

}  // namespace sfu::wire
