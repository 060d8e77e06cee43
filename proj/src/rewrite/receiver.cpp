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

std::set<int64_t> receiver_nacks(const std::vector<uint16_t>& rewritten_arrivals) {
  std::set<int64_t> seen;
  seqnum::Unwrapper unwrapper;
  for (uint16_t v : rewritten_arrivals) seen.insert(unwrapper.unwrap(v));
  std::set<int64_t> missing;
  if (seen.size() < 2) return missing;
  int64_t prev = *seen.begin();
  for (auto it = std::next(seen.begin()); it != seen.end(); ++it) {
    for (int64_t v = prev + 1; v < *it; ++v) missing.insert(v);
    prev = *it;
  }
  return missing;
}

}  // namespace sfu::rewrite
