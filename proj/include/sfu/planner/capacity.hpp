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

#ifndef SFU_PLANNER_CAPACITY_HPP
#define SFU_PLANNER_CAPACITY_HPP

#include <cstdint>

#include "sfu/planner/planner.hpp"

namespace sfu::planner {

// Capacity model parameters. Tree-resource bounds per mode:
//   nra:   m*T        ra_r: m*T/q        ra_sr: 2*T/(q*N)
// two_party has no tree bound; it is limited by the per-stream state table
// and egress bandwidth. All modes are additionally capped by egress
// bandwidth. Defaults are calibrated to the reference hardware: 3 Mb/s per
// stream (64K streams ~ 197 Gb/s egress) and a 3.2 Tb/s switch.
struct CapacityParams {
  uint64_t trees = 65536;                    // T
  uint64_t meetings_per_tree = 2;            // m
  uint64_t qualities = 3;                    // q
  uint64_t participants_per_meeting = 3;     // N
  uint64_t per_stream_bps = 3'000'000;
  uint64_t egress_budget_bps = 3'200'000'000'000ULL;
  uint64_t streams_per_participant = 1;
  uint64_t stream_table_bound = 1'000'000;   // two-party unicast rule capacity
};

uint64_t capacity(Mode mode, const CapacityParams& p);

}  // namespace sfu::planner

#endif  // SFU_PLANNER_CAPACITY_HPP
