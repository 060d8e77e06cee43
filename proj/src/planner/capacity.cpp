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

#include "sfu/planner/capacity.hpp"

#include <algorithm>

namespace sfu::planner {

namespace {

uint64_t egress_cap(Mode mode, const CapacityParams& p) {
  // Per-meeting egress load, every participant sending: each of N uplink
  // streams is replicated to N-1 receivers. Two-party forwards each of the
  // two streams once.
  uint64_t n = std::max<uint64_t>(p.participants_per_meeting, 2);
  uint64_t per_meeting =
      mode == Mode::two_party
          ? 2 * p.per_stream_bps * p.streams_per_participant
          : n * (n - 1) * p.per_stream_bps * p.streams_per_participant;
  if (per_meeting == 0) return UINT64_MAX;
  return p.egress_budget_bps / per_meeting;
}

}  // namespace

uint64_t capacity(Mode mode, const CapacityParams& p) {
  uint64_t tree_bound = 0;
  switch (mode) {
    case Mode::nra:
      tree_bound = p.meetings_per_tree * p.trees;
      break;
    case Mode::ra_r:
      tree_bound = p.meetings_per_tree * p.trees / p.qualities;
      break;
    case Mode::ra_sr:
      tree_bound = 2 * p.trees / (p.qualities * p.participants_per_meeting);
      break;
    case Mode::two_party:
      tree_bound = p.stream_table_bound;
      break;
  }
  return std::min(tree_bound, egress_cap(mode, p));
}

}  // namespace sfu::planner
