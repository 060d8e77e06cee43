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

#include "sfu/cli/rewrite_bench.hpp"

#include <atomic>
#include <sstream>
#include <thread>

#include "sfu/sim/channel.hpp"

namespace sfu::cli {

namespace {

rewrite::DropRule rule_for(const BenchParams& params) {
  rewrite::DropRule rule;
  rule.layer_cycle = {0, 2, 1, 2};
  rule.dropped_layers = params.cadence == "l1l2" ? std::set<uint8_t>{1, 2}
                                                 : std::set<uint8_t>{2};
  rule.min_packets_per_frame = params.packets_per_frame;
  return rule;
}

}  // namespace

BenchResult run_bench_one(const BenchParams& params, uint64_t seed) {
  rewrite::DropRule rule = rule_for(params);

  // synthetic labeled stream; fixed packets per frame so the control
  // plane's per-frame estimate is exact
  std::vector<rewrite::LabeledPacket> stream;
  stream.reserve(params.packets);
  uint16_t seq = 65000;  // cross the wrap early
  uint16_t frame = 0;
  while (stream.size() < params.packets) {
    bool suppressed = rule.frame_suppressed(frame);
    for (uint16_t k = 0; k < params.packets_per_frame && stream.size() < params.packets; ++k) {
      rewrite::LabeledPacket p;
      p.seq = seq++;
      p.frame = frame;
      p.start_of_frame = (k == 0);
      p.end_of_frame = (k == params.packets_per_frame - 1);
      p.disposition =
          suppressed ? rewrite::Disposition::suppressed : rewrite::Disposition::forwarded;
      stream.push_back(p);
    }
    ++frame;
  }

  sim::ChannelModel channel;
  channel.loss_rate = params.loss;
  channel.reorder_prob = params.reorder;
  channel.reorder_depth = params.reorder_depth;
  std::vector<size_t> arrival_order = sim::apply_channel(stream.size(), channel, seed);

  std::vector<bool> arrived(stream.size(), false);
  for (size_t idx : arrival_order) arrived[idx] = true;
  for (size_t i = 0; i < stream.size(); ++i) {
    if (!arrived[i] && stream[i].disposition == rewrite::Disposition::forwarded) {
      stream[i].disposition = rewrite::Disposition::lost;
    }
  }

  // heuristic path: suppressed packets are pruned before the rewriter
  rewrite::SlmState slm;
  rewrite::SlrState slr;
  const bool use_slm = params.heuristic == "slm";
  std::vector<uint16_t> heuristic_arrivals;
  uint64_t dropped = 0;
  for (size_t idx : arrival_order) {
    const auto& p = stream[idx];
    if (p.disposition == rewrite::Disposition::suppressed) continue;
    rewrite::PacketView view{p.seq, p.frame, p.start_of_frame, p.end_of_frame, false};
    rewrite::RewriteAction action =
        use_slm ? rewrite::slm_process(slm, view, rule) : rewrite::slr_process(slr, view, rule);
    if (action.forward) {
      heuristic_arrivals.push_back(action.new_seq);
    } else {
      ++dropped;
    }
  }

  // oracle path: ideal values for the same arrivals
  std::vector<uint16_t> ideal = rewrite::oracle_rewrite(stream);
  std::vector<uint16_t> oracle_arrivals;
  for (size_t idx : arrival_order) {
    if (stream[idx].disposition == rewrite::Disposition::forwarded) {
      oracle_arrivals.push_back(ideal[idx]);
    }
  }

  BenchResult r;
  r.seed = seed;
  r.loss = params.loss;
  r.nacks_heuristic = rewrite::receiver_nacks(heuristic_arrivals).size();
  r.nacks_oracle = rewrite::receiver_nacks(oracle_arrivals).size();
  r.forwarded = heuristic_arrivals.size();
  r.dropped_by_rewriter = dropped;
  r.overhead = r.forwarded == 0
                   ? 0.0
                   : double(int64_t(r.nacks_heuristic) - int64_t(r.nacks_oracle)) /
                         double(r.forwarded);
  return r;
}

std::vector<BenchResult> run_bench(const BenchParams& params) {
  std::vector<BenchResult> results(params.seed_count);
  unsigned workers = std::max(1u, std::min(params.threads, params.seed_count));
  if (workers == 1) {
    for (unsigned i = 0; i < params.seed_count; ++i) {
      results[i] = run_bench_one(params, params.seed + i);
    }
    return results;
  }
  std::vector<std::thread> pool;
  std::atomic<unsigned> next{0};
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (unsigned i = next.fetch_add(1); i < params.seed_count; i = next.fetch_add(1)) {
        results[i] = run_bench_one(params, params.seed + i);
      }
    });
  }
  for (auto& t : pool) t.join();
  return results;
}

std::string bench_csv(const std::string& heuristic, const std::vector<BenchResult>& results) {
  std::ostringstream os;
  os << "heuristic,loss,seed,overhead,nacks,nacks_oracle,forwarded\n";
  for (const auto& r : results) {
    os << heuristic << "," << r.loss << "," << r.seed << "," << r.overhead << ","
       << r.nacks_heuristic << "," << r.nacks_oracle << "," << r.forwarded << "\n";
  }
  return os.str();
}

}  // namespace sfu::cli
