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

#include "sfu/sim/channel.hpp"

#include <algorithm>
#include <random>

namespace sfu::sim {

std::vector<size_t> apply_channel(size_t packet_count, const ChannelModel& channel,
                                  uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  struct Key {
    size_t index;
    double sort_key;
  };
  std::vector<Key> survivors;
  survivors.reserve(packet_count);
  for (size_t i = 0; i < packet_count; ++i) {
    bool lost = coin(rng) < channel.loss_rate;
    bool displaced = channel.reorder_depth > 0 && coin(rng) < channel.reorder_prob;
    double key = double(i);
    if (displaced) {
      key += 0.5 + std::uniform_int_distribution<unsigned>(1, channel.reorder_depth)(rng);
    }
    if (!lost) survivors.push_back({i, key});
  }
  std::stable_sort(survivors.begin(), survivors.end(),
                   [](const Key& a, const Key& b) { return a.sort_key < b.sort_key; });
  std::vector<size_t> order;
  order.reserve(survivors.size());
  for (const auto& s : survivors) order.push_back(s.index);
  return order;
}

}  // namespace sfu::sim
