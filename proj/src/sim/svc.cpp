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

#include "sfu/sim/svc.hpp"

#include <algorithm>
#include <set>

namespace sfu::sim {

SvcPattern SvcPattern::compact() {
  SvcPattern p;
  p.packets_per_frame = {{{2, 2}, {2, 2}, {2, 2}}};
  return p;
}

SvcPattern SvcPattern::table720p() {
  SvcPattern p;
  // 31 packets per 4-frame cycle -> 232.5 video pps at 30 fps, which with
  // 50 audio pps lands on the reference capture's ~284 RTP pps
  p.packets_per_frame = {{{10, 10}, {7, 7}, {7, 7}}};
  p.video_packet_bytes = {900, 1400};
  p.audio_packet_bytes = 128;
  return p;
}

std::vector<UplinkPacket> generate_stream(const SvcPattern& pattern, int64_t duration_us,
                                          uint64_t seed, bool sends_video, bool sends_audio) {
  std::vector<UplinkPacket> out;
  std::mt19937_64 rng(seed);

  if (sends_video) {
    std::uniform_int_distribution<int> size_dist(pattern.video_packet_bytes.first,
                                                 pattern.video_packet_bytes.second);
    const int64_t frame_interval = 1'000'000 / pattern.fps;
    uint16_t seq = 1;
    uint64_t frame = 0;
    std::map<uint8_t, size_t> template_rr;  // rotate template ids within a layer
    for (int64_t t = 0; t < duration_us; t += frame_interval, ++frame) {
      uint8_t layer = pattern.layer_of_frame(frame);
      auto [lo, hi] = pattern.packets_per_frame[layer];
      uint16_t count = lo == hi ? lo
                                : uint16_t(std::uniform_int_distribution<int>(lo, hi)(rng));
      const auto& templates = pattern.layer_templates.at(layer);
      uint8_t template_id = templates[template_rr[layer]++ % templates.size()];
      if (frame == 0) template_id = templates.front();
      for (uint16_t k = 0; k < count; ++k) {
        UplinkPacket p;
        p.kind = UplinkKind::media_video;
        p.time_us = t + k * 250;
        p.seq = seq++;
        p.frame = uint16_t(frame & 0xFFFF);
        p.template_id = template_id;
        p.layer = layer;
        p.start_of_frame = (k == 0);
        p.end_of_frame = (k == count - 1);
        p.carries_structure = (frame == 0 && k == 0);
        p.frame_packet_count = count;
        p.size_bytes = uint16_t(size_dist(rng) + (p.carries_structure ? 8 : 0));
        out.push_back(p);
      }
    }
  }

  if (sends_audio) {
    const int64_t audio_interval = int64_t(1'000'000 / pattern.audio_pps);
    uint16_t seq = 1;
    for (int64_t t = 0; t < duration_us; t += audio_interval) {
      UplinkPacket p;
      p.kind = UplinkKind::media_audio;
      p.time_us = t + 100;
      p.seq = seq++;
      p.size_bytes = pattern.audio_packet_bytes;
      out.push_back(p);
    }
  }

  auto cadence = [&](double per_s, UplinkKind kind, uint16_t size, int64_t phase) {
    if (per_s <= 0.0) return;
    const int64_t interval = int64_t(1'000'000.0 / per_s);
    for (int64_t t = phase; t < duration_us; t += interval) {
      UplinkPacket p;
      p.kind = kind;
      p.time_us = t;
      p.size_bytes = size;
      out.push_back(p);
    }
  };
  // sizes match the serialized forms: SR+SDES compound, RR, RR+REMB, STUN
  cadence(pattern.sr_sdes_per_s, UplinkKind::rtcp_sr_sdes, 80, 901);
  cadence(pattern.rr_per_s, UplinkKind::rtcp_rr, 32, 1301);
  cadence(pattern.remb_per_s, UplinkKind::rtcp_rr_remb, 56, 1102);
  cadence(pattern.stun_per_s, UplinkKind::stun, 28, 507);

  std::stable_sort(out.begin(), out.end(),
                   [](const UplinkPacket& a, const UplinkPacket& b) { return a.time_us < b.time_us; });
  return out;
}

std::vector<uint64_t> frame_dependencies(uint64_t frame) {
  if (frame == 0) return {};
  switch (frame % 4) {
    case 0: return {frame - 4};   // base on previous base
    case 1: return {frame - 1};   // second enhancement on the base
    case 2: return {frame - 2};   // first enhancement on the base
    default: return {frame - 1};  // second enhancement on the first
  }
}

bool decodability_check(const std::vector<uint64_t>& delivered_frames,
                        const std::vector<uint64_t>& suppressed_frames) {
  std::set<uint64_t> delivered(delivered_frames.begin(), delivered_frames.end());
  (void)suppressed_frames;
  // a delivered frame whose dependency is absent fails, whether the
  // dependency was lost or suppressed out from under it; suppression that
  // takes all dependents with it leaves no delivered frame to complain
  for (uint64_t f : delivered) {
    for (uint64_t dep : frame_dependencies(f)) {
      if (!delivered.count(dep)) return false;
    }
  }
  return true;
}

}  // namespace sfu::sim
