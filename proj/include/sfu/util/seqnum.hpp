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

#ifndef SFU_UTIL_SEQNUM_HPP
#define SFU_UTIL_SEQNUM_HPP

#include <cstdint>

namespace sfu::seqnum {

// Serial arithmetic mod 2^16 with a half-window (32768) newer/older rule, as
// RTP sequence numbers and AV1 frame numbers require.

inline int32_t diff(uint16_t a, uint16_t b) {
  int32_t d = int32_t(a) - int32_t(b);
  if (d < -32768) d += 65536;
  if (d > 32767) d -= 65536;
  return d;
}

inline bool newer(uint16_t a, uint16_t b) { return diff(a, b) > 0; }
inline bool older(uint16_t a, uint16_t b) { return diff(a, b) < 0; }
inline uint16_t add(uint16_t a, int32_t d) { return uint16_t((int32_t(a) + d) & 0xFFFF); }

// Maps 16-bit values arriving roughly in order onto a monotone 64-bit axis.
class Unwrapper {
 public:
  int64_t unwrap(uint16_t v) {
    if (!started_) {
      started_ = true;
      last_ = v;
      return last_;
    }
    int64_t base = last_ - (last_ & 0xFFFF);
    int64_t candidate = base + v;
    // pick the alias closest to the previous value
    if (candidate - last_ > 32768) candidate -= 65536;
    else if (last_ - candidate > 32768) candidate += 65536;
    if (candidate > last_) last_ = candidate;
    return candidate;
  }

 private:
  bool started_ = false;
  int64_t last_ = 0;
};

}  // namespace sfu::seqnum

#endif  // SFU_UTIL_SEQNUM_HPP
