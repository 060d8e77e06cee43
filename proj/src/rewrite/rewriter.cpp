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

#include "sfu/rewrite/rewriter.hpp"

#include <algorithm>

namespace sfu::rewrite {

using seqnum::add;
using seqnum::diff;

namespace {

// Expected suppressed-packet count for frames strictly inside (from, to),
// optionally skipping frames at or below an already-attributed bound.
struct SuppressedScan {
  uint32_t packets = 0;
  bool any = false;
  uint16_t highest_frame = 0;
};

SuppressedScan scan_suppressed(uint16_t from, uint16_t to, const DropRule& rule,
                               const uint16_t* attributed_bound) {
  SuppressedScan s;
  for (uint16_t f = add(from, 1); f != to; f = add(f, 1)) {
    if (!rule.frame_suppressed(f)) continue;
    if (attributed_bound != nullptr && diff(f, *attributed_bound) <= 0) continue;
    s.packets += rule.min_packets_per_frame;
    s.any = true;
    s.highest_frame = f;
  }
  return s;
}

}  // namespace

RewriteAction slm_process(SlmState& state, const PacketView& pkt, const DropRule& rule) {
  if (pkt.suppressed_layer) return RewriteAction::drop();  // pruned upstream

  if (!state.started) {
    state.started = true;
    state.highest_seq = pkt.seq;
    state.highest_frame = pkt.frame;
    state.offset = 0;
    return RewriteAction::fwd(pkt.seq);
  }

  int32_t delta = diff(pkt.seq, state.highest_seq);
  if (delta == 1) {
    state.highest_seq = pkt.seq;
    if (diff(pkt.frame, state.highest_frame) > 0) state.highest_frame = pkt.frame;
    return RewriteAction::fwd(add(pkt.seq, -int32_t(state.offset)));
  }
  if (delta > 1) {
    uint32_t missing = uint32_t(delta - 1);
    SuppressedScan s = scan_suppressed(state.highest_frame, pkt.frame, rule, nullptr);
    // all-or-nothing: credit the gap only when it matches the cadence
    if (s.any && s.packets == missing) state.offset += missing;
    state.highest_seq = pkt.seq;
    if (diff(pkt.frame, state.highest_frame) > 0) state.highest_frame = pkt.frame;
    return RewriteAction::fwd(add(pkt.seq, -int32_t(state.offset)));
  }
  if (delta == -1) {
    // the one reordering the paper's low-memory variant tolerates
    return RewriteAction::fwd(add(pkt.seq, -int32_t(state.offset)));
  }
  return RewriteAction::drop();
}

RewriteAction slr_process(SlrState& state, const PacketView& pkt, const DropRule& rule) {
  if (pkt.suppressed_layer) return RewriteAction::drop();

  // (a) first packet of the stream
  if (!state.started) {
    state.started = true;
    state.highest_seq = pkt.seq;
    state.highest_frame = pkt.frame;
    state.offset = 0;
    state.first_seq_latest_frame = pkt.seq;
    state.highest_seq_latest_frame = pkt.seq;
    state.last_frame_ended = pkt.end_of_frame;
    return RewriteAction::fwd(pkt.seq);
  }

  int32_t frame_delta = diff(pkt.frame, state.highest_frame);

  // (b) another packet of the latest frame; the offset is constant within a
  // frame, so any same-frame straggler maps to its own untaken slot
  if (frame_delta == 0) {
    int32_t vs_highest = diff(pkt.seq, state.highest_seq_latest_frame);
    int32_t vs_first = diff(pkt.seq, state.first_seq_latest_frame);
    if (vs_highest == 0 || vs_first == 0) return RewriteAction::drop();  // duplicate
    if (vs_highest > 0) {
      state.highest_seq_latest_frame = pkt.seq;
      state.highest_seq = pkt.seq;
    } else if (vs_first < 0) {
      state.first_seq_latest_frame = pkt.seq;
    }
    // seqs strictly inside the observed bounds arrive at most once, so
    // their slots are untaken
    if (pkt.end_of_frame) state.last_frame_ended = true;
    return RewriteAction::fwd(add(pkt.seq, -int32_t(state.offset)));
  }

  // (c) next consecutive frame: nothing between to attribute
  if (frame_delta == 1) {
    if (diff(pkt.seq, state.highest_seq) <= 0) return RewriteAction::drop();
    state.highest_frame = pkt.frame;
    state.highest_seq = pkt.seq;
    state.first_seq_latest_frame = pkt.seq;
    state.highest_seq_latest_frame = pkt.seq;
    state.last_frame_ended = pkt.end_of_frame;
    return RewriteAction::fwd(add(pkt.seq, -int32_t(state.offset)));
  }

  // (d) skipped frames: credit the cadence with a conservative lower bound,
  // never exceeding the observed gap, counting each suppressed frame once
  if (frame_delta > 1) {
    int32_t seq_delta = diff(pkt.seq, state.highest_seq);
    if (seq_delta <= 0) return RewriteAction::drop();  // frame/seq disagree
    uint32_t missing = uint32_t(seq_delta - 1);
    const uint16_t* bound =
        state.any_frame_attributed ? &state.highest_suppressed_frame : nullptr;
    SuppressedScan s = scan_suppressed(state.highest_frame, pkt.frame, rule, bound);
    uint32_t credit = std::min(s.packets, missing);
    state.offset += credit;
    if (s.any) {
      state.any_frame_attributed = true;
      state.highest_suppressed_frame = s.highest_frame;
    }
    state.highest_frame = pkt.frame;
    state.highest_seq = pkt.seq;
    state.first_seq_latest_frame = pkt.seq;
    state.highest_seq_latest_frame = pkt.seq;
    state.last_frame_ended = pkt.end_of_frame;
    return RewriteAction::fwd(add(pkt.seq, -int32_t(state.offset)));
  }

  // (e) frame older than the latest: forward only when the slot is provably
  // unissued. The immediate predecessor of the latest frame's first packet
  // is the one such slot this state can prove; anything deeper risks
  // colliding with values issued under an older offset.
  if (add(pkt.seq, 1) == state.first_seq_latest_frame && frame_delta == -1 &&
      pkt.end_of_frame) {
    return RewriteAction::fwd(add(pkt.seq, -int32_t(state.offset)));
  }
  return RewriteAction::drop();
}

}  // namespace sfu::rewrite
