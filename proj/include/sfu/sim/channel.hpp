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

#ifndef SFU_SIM_CHANNEL_HPP
#define SFU_SIM_CHANNEL_HPP

#include <cstdint>
#include <optional>
#include <vector>

namespace sfu::sim {

struct ChannelModel {
  double loss_rate = 0.0;
  double reorder_prob = 0.0;
  unsigned reorder_depth = 0;
  int64_t base_delay_us = 0;
  std::optional<uint64_t> capacity_bps;
};

// Arrival schedule for n packets: each independently dropped with
// loss_rate, survivors displaced at most reorder_depth positions with
// reorder_prob. Returns surviving input indices in arrival order.
std::vector<size_t> apply_channel(size_t packet_count, const ChannelModel& channel,
                                  uint64_t seed);

}  // namespace sfu::sim

#endif  // SFU_SIM_CHANNEL_HPP
