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

namespace sfu::rewrite {

std::vector<uint16_t> oracle_rewrite(const std::vector<LabeledPacket>& stream) {
  std::vector<uint16_t> out;
  out.reserve(stream.size());
  uint32_t suppressed_before = 0;
  for (const auto& p : stream) {
    out.push_back(seqnum::add(p.seq, -int32_t(suppressed_before & 0xFFFF)));
    if (p.disposition == Disposition::suppressed) ++suppressed_before;
  }
  return out;
}

}  // namespace sfu::rewrite
