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

#ifndef SFU_FEEDBACK_FEEDBACK_HPP
#define SFU_FEEDBACK_FEEDBACK_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "sfu/wire/rtcp.hpp"

namespace sfu::feedback {

using StreamId = uint64_t;  // (sender participant << 32) | media ssrc

inline StreamId make_stream_id(uint32_t sender, uint32_t ssrc) {
  return (StreamId(sender) << 32) | ssrc;
}

class FeedbackError : public std::runtime_error {
 public:
  explicit FeedbackError(const std::string& what) : std::runtime_error(what) {}
};

struct SelectionChange {
  int64_t time_us = 0;
  StreamId stream = 0;
  std::optional<uint32_t> old_receiver;
  uint32_t new_receiver = 0;
};

// Per-stream receiver bandwidth tracking. Each (stream, receiver) pair
// keeps an EWMA of its REMB estimates; the argmax receiver's feedback is
// the only feedback the data plane forwards to the sender.
class FeedbackState {
 public:
  explicit FeedbackState(double alpha = 0.3) : alpha_(alpha) {}

  double update_estimate(StreamId stream, uint32_t receiver, uint64_t remb_bps,
                         int64_t now_us);
  double update_estimate(StreamId stream, uint32_t receiver, uint64_t remb_bps,
                         int64_t now_us, double alpha);

  // Argmax over EWMAs; ties break toward the lowest receiver id. Installs a
  // new forwarding rule only when the winner changes.
  uint32_t select_best(StreamId stream, int64_t now_us);

  std::optional<uint32_t> selected_receiver(StreamId stream) const;
  std::optional<double> estimate(StreamId stream, uint32_t receiver) const;
  const std::vector<SelectionChange>& changes() const { return changes_; }
  size_t reconfigurations() const { return changes_.size(); }

 private:
  struct Entry {
    double ewma_bps = 0.0;
    int64_t last_update_us = 0;
  };
  double alpha_;
  std::map<StreamId, std::map<uint32_t, Entry>> estimates_;
  std::map<StreamId, uint32_t> selected_;
  std::vector<SelectionChange> changes_;
};

// Where the data plane sends one RTCP message: zero or more participant
// destinations, plus whether the switch agent gets a copy.
struct RtcpRoute {
  std::vector<uint32_t> destinations;
  bool copy_to_agent = false;
};

// Directory the control plane maintains so feedback can be routed: per
// stream, who sends it and who receives it.
struct StreamDirectory {
  struct StreamInfo {
    uint32_t sender = 0;
    std::vector<uint32_t> receivers;
  };
  std::map<StreamId, StreamInfo> streams;
  // per (origin participant, ssrc referenced in feedback) -> stream
  std::optional<StreamId> stream_of_ssrc(uint32_t ssrc) const;
};

// Forwarding matrix: SR/SDES replicate to the stream's receivers; RR/REMB
// reach the sender only from the currently selected receiver (agent copy
// always); NACK/PLI go to the sender (agent copy always).
RtcpRoute route_rtcp(const wire::RtcpMessage& msg, uint32_t origin,
                     const StreamDirectory& dir, const FeedbackState& state);

}  // namespace sfu::feedback

#endif  // SFU_FEEDBACK_FEEDBACK_HPP
