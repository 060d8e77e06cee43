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

#ifndef SFU_SIM_SVC_HPP
#define SFU_SIM_SVC_HPP

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

namespace sfu::sim {

// L1T3 traffic shape: a 4-frame temporal cycle [0,2,1,2]; dropping layer 2
// halves the delivered frame rate, dropping layers 1-2 quarters it.
struct SvcPattern {
  uint32_t fps = 30;
  std::vector<uint8_t> layer_cycle{0, 2, 1, 2};
  std::map<uint8_t, std::vector<uint8_t>> layer_templates{
      {0, {0, 1}}, {1, {2}}, {2, {3, 4}}};
  // packets per frame as [lo, hi] per temporal layer
  std::array<std::pair<uint16_t, uint16_t>, 3> packets_per_frame{
      {{2, 2}, {1, 2}, {1, 2}}};
  std::pair<uint16_t, uint16_t> video_packet_bytes{800, 1400};
  uint16_t audio_packet_bytes = 200;
  double audio_pps = 50.0;
  // per-participant uplink control cadences
  double sr_sdes_per_s = 5.75;
  double rr_per_s = 0.13;
  double remb_per_s = 9.07;
  double stun_per_s = 1.15;

  uint8_t layer_of_frame(uint64_t frame) const {
    return layer_cycle[frame % layer_cycle.size()];
  }

  // small fixed frames; zero packet-count ambiguity for rewrite studies
  static SvcPattern compact();
  // calibrated to the reference three-party 720p capture mix
  static SvcPattern table720p();
};

enum class UplinkKind { media_video, media_audio, rtcp_sr_sdes, rtcp_rr, rtcp_rr_remb, stun };

struct UplinkPacket {
  int64_t time_us = 0;
  UplinkKind kind = UplinkKind::media_video;
  uint16_t size_bytes = 0;
  // media fields
  uint16_t seq = 0;
  uint16_t frame = 0;
  uint8_t template_id = 0;
  uint8_t layer = 0;
  bool start_of_frame = false;
  bool end_of_frame = false;
  bool carries_structure = false;  // extended dependency descriptor
  uint16_t frame_packet_count = 0;
};

// One participant's uplink over `duration_us`, media plus control cadences,
// deterministic in the seed.
std::vector<UplinkPacket> generate_stream(const SvcPattern& pattern, int64_t duration_us,
                                          uint64_t seed, bool sends_video = true,
                                          bool sends_audio = true);

// L1T3 frame dependencies: base on previous base, first enhancement on its
// base, second enhancement on the nearest lower-layer predecessor.
std::vector<uint64_t> frame_dependencies(uint64_t frame);

// True iff no delivered frame depends on a frame that is neither delivered
// nor suppressed together with all of its dependents.
bool decodability_check(const std::vector<uint64_t>& delivered_frames,
                        const std::vector<uint64_t>& suppressed_frames);

}  // namespace sfu::sim

#endif  // SFU_SIM_SVC_HPP
