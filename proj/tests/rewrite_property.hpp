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

// Shared property machinery for the sequence-rewriting invariants: random
// cadence-consistent streams through a lossy, reordering channel, then the
// three invariants checked on the heuristic output. Test-only code,
// independent of the rewriter's internals.

#ifndef SFUSIM_TESTS_REWRITE_PROPERTY_HPP
#define SFUSIM_TESTS_REWRITE_PROPERTY_HPP

#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sfu/rewrite/rewriter.hpp"
#include "sfu/sim/channel.hpp"

namespace proptest {

struct TrialStream {
  std::vector<sfu::rewrite::LabeledPacket> packets;  // original order
  sfu::rewrite::DropRule rule;
};

inline TrialStream random_stream(std::mt19937_64& rng, size_t frames) {
  using namespace sfu::rewrite;
  TrialStream t;
  t.rule.layer_cycle = {0, 2, 1, 2};
  t.rule.dropped_layers = (rng() % 3 == 0) ? std::set<uint8_t>{1, 2} : std::set<uint8_t>{2};
  bool variable = rng() % 2 == 0;
  std::array<uint16_t, 3> fixed{uint16_t(1 + rng() % 3), uint16_t(1 + rng() % 3),
                                uint16_t(1 + rng() % 3)};
  t.rule.min_packets_per_frame = variable ? 1 : std::min({fixed[0], fixed[1], fixed[2]});
  uint16_t seq = uint16_t(rng());
  for (size_t f = 0; f < frames; ++f) {
    uint8_t layer = t.rule.layer_cycle[f % t.rule.layer_cycle.size()];
    uint16_t count = variable ? uint16_t(1 + rng() % 3) : fixed[layer];
    for (uint16_t k = 0; k < count; ++k) {
      LabeledPacket p;
      p.seq = seq++;
      p.frame = uint16_t(f & 0xFFFF);
      p.start_of_frame = (k == 0);
      p.end_of_frame = (k == count - 1);
      p.disposition = t.rule.dropped_layers.count(layer) ? Disposition::suppressed
                                                         : Disposition::forwarded;
      t.packets.push_back(p);
    }
  }
  return t;
}

// Runs one schedule trial and returns a violation description, or nothing.
inline std::optional<std::string> check_one_schedule(std::mt19937_64& rng, bool use_slm) {
  using namespace sfu::rewrite;
  TrialStream t = random_stream(rng, 40 + rng() % 80);
  sfu::sim::ChannelModel ch;
  ch.loss_rate = double(rng() % 31) / 100.0;
  ch.reorder_prob = double(rng() % 31) / 100.0;
  ch.reorder_depth = unsigned(rng() % 9);
  auto order = sfu::sim::apply_channel(t.packets.size(), ch, rng());

  std::vector<bool> arrived(t.packets.size(), false);
  for (size_t idx : order) arrived[idx] = true;
  for (size_t i = 0; i < t.packets.size(); ++i) {
    if (!arrived[i] && t.packets[i].disposition == Disposition::forwarded) {
      t.packets[i].disposition = Disposition::lost;
    }
  }

  std::vector<int64_t> orig_unwrapped(t.packets.size());
  {
    sfu::seqnum::Unwrapper u;
    for (size_t i = 0; i < t.packets.size(); ++i) {
      orig_unwrapped[i] = u.unwrap(t.packets[i].seq);
    }
  }

  struct Forwarded {
    int64_t orig, rewritten;
  };
  std::vector<Forwarded> forwarded;
  std::set<int64_t> delivered_orig;
  SlmState slm;
  SlrState slr;
  for (size_t idx : order) {
    const LabeledPacket& p = t.packets[idx];
    if (p.disposition == Disposition::suppressed) continue;
    PacketView view{p.seq, p.frame, p.start_of_frame, p.end_of_frame, false};
    RewriteAction action =
        use_slm ? slm_process(slm, view, t.rule) : slr_process(slr, view, t.rule);
    if (!action.forward) continue;
    int64_t shift = int64_t(uint16_t(p.seq - action.new_seq));
    forwarded.push_back({orig_unwrapped[idx], orig_unwrapped[idx] - shift});
    delivered_orig.insert(orig_unwrapped[idx]);
  }

  std::sort(forwarded.begin(), forwarded.end(),
            [](const Forwarded& a, const Forwarded& b) { return a.orig < b.orig; });

  // (1) order preservation and (2) no duplicates: strictly increasing
  for (size_t i = 1; i < forwarded.size(); ++i) {
    if (forwarded[i].rewritten <= forwarded[i - 1].rewritten) {
      std::ostringstream os;
      os << (use_slm ? "slm" : "slr") << ": rewritten order violated at orig "
         << forwarded[i].orig;
      return os.str();
    }
  }

  // (3) losses stay visible: between adjacent deliveries the rewritten gap
  // covers every undelivered forwarded-layer packet
  std::map<int64_t, size_t> packet_at;
  for (size_t i = 0; i < t.packets.size(); ++i) packet_at[orig_unwrapped[i]] = i;
  for (size_t i = 1; i < forwarded.size(); ++i) {
    int64_t gap = forwarded[i].rewritten - forwarded[i - 1].rewritten - 1;
    int64_t undeliverable = 0;
    for (int64_t o = forwarded[i - 1].orig + 1; o < forwarded[i].orig; ++o) {
      auto it = packet_at.find(o);
      if (it == packet_at.end()) continue;
      const auto& p = t.packets[it->second];
      if (p.disposition != Disposition::suppressed && !delivered_orig.count(o)) {
        ++undeliverable;
      }
    }
    if (gap < undeliverable) {
      std::ostringstream os;
      os << (use_slm ? "slm" : "slr") << ": gap " << gap << " hides " << undeliverable
         << " losses before orig " << forwarded[i].orig;
      return os.str();
    }
  }
  return std::nullopt;
}

// Full sweep over both heuristics; returns the first violation found.
inline std::optional<std::string> run_schedule_property(size_t trials, uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (size_t trial = 0; trial < trials; ++trial) {
    auto bad = check_one_schedule(rng, trial % 2 == 0);
    if (bad.has_value()) return bad;
  }
  return std::nullopt;
}

}  // namespace proptest

#endif  // SFUSIM_TESTS_REWRITE_PROPERTY_HPP
