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

#ifndef SFU_REWRITE_REWRITER_HPP
#define SFU_REWRITE_REWRITER_HPP

#include <cstdint>
#include <set>
#include <vector>

#include "sfu/util/seqnum.hpp"
#include "sfu/wire/stun.hpp"

namespace sfu::rewrite {

// Identifies one rate-adapted stream in the rewrite tables.
struct StreamKey {
  wire::Endpoint sender_addr;
  wire::Endpoint receiver_addr;
  uint32_t ssrc = 0;

  auto operator<=>(const StreamKey&) const = default;
};

// Frame-skip cadence installed by the control plane: a periodic layer
// pattern and the set of suppressed layers. min_packets_per_frame is the
// control plane's lower-bound estimate of a suppressed frame's size; the
// rewriter never attributes more than it can prove.
struct DropRule {
  std::vector<uint8_t> layer_cycle{0, 2, 1, 2};
  std::set<uint8_t> dropped_layers;
  uint16_t min_packets_per_frame = 1;

  uint8_t layer_of(uint16_t frame) const {
    return layer_cycle.empty() ? 0 : layer_cycle[frame % layer_cycle.size()];
  }
  bool frame_suppressed(uint16_t frame) const {
    return dropped_layers.count(layer_of(frame)) != 0;
  }
};

struct PacketView {
  uint16_t seq = 0;
  uint16_t frame = 0;
  bool start_of_frame = false;
  bool end_of_frame = false;
  bool suppressed_layer = false;  // pruned upstream; guarded here anyway
};

struct RewriteAction {
  bool forward = false;
  uint16_t new_seq = 0;

  static RewriteAction drop() { return {}; }
  static RewriteAction fwd(uint16_t s) { return {true, s}; }
};

struct SlmState {
  bool started = false;
  uint16_t highest_seq = 0;
  uint16_t highest_frame = 0;
  uint32_t offset = 0;  // monotone non-decreasing
};

struct SlrState {
  bool started = false;
  uint16_t highest_seq = 0;
  uint16_t highest_frame = 0;
  uint32_t offset = 0;
  uint16_t first_seq_latest_frame = 0;
  uint16_t highest_seq_latest_frame = 0;
  bool last_frame_ended = false;
  bool any_frame_attributed = false;
  uint16_t highest_suppressed_frame = 0;  // valid once any_frame_attributed
};

// Low-memory heuristic. Sequence-gap handling: a gap is credited to the
// cadence only when it matches the expected suppressed-packet count between
// the tracked and arriving frames exactly; otherwise the gap is treated as
// loss and left visible. Reordered packets other than highest-1 are dropped
// so a rewritten value can never repeat.
RewriteAction slm_process(SlmState& state, const PacketView& pkt, const DropRule& rule);

// Low-retransmission heuristic. Tracks the latest frame's bounds so
// same-frame reordering is always forwardable, and credits skipped
// intervals with a conservative lower bound of suppressed packets instead
// of all-or-nothing matching.
RewriteAction slr_process(SlrState& state, const PacketView& pkt, const DropRule& rule);

enum class Disposition { forwarded, suppressed, lost };

struct LabeledPacket {
  uint16_t seq = 0;
  uint16_t frame = 0;
  bool start_of_frame = false;
  bool end_of_frame = false;
  Disposition disposition = Disposition::forwarded;
};

// Ideal rewrite with full knowledge: each sequence number shifts down by
// the count of suppressed packets before it (original order). Returned
// per-packet, parallel to the input.
std::vector<uint16_t> oracle_rewrite(const std::vector<LabeledPacket>& stream);

// Receiver model: every value strictly inside the observed span that never
// arrived is NACKed once. Arrival order may be reordered; values are
// unwrapped on a monotone axis.
std::set<int64_t> receiver_nacks(const std::vector<uint16_t>& rewritten_arrivals);

}  // namespace sfu::rewrite

#endif  // SFU_REWRITE_REWRITER_HPP
