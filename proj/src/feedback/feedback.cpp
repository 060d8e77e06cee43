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

#include "sfu/feedback/feedback.hpp"

namespace sfu::feedback {

double FeedbackState::update_estimate(StreamId stream, uint32_t receiver, uint64_t remb_bps,
                                      int64_t now_us) {
  return update_estimate(stream, receiver, remb_bps, now_us, alpha_);
}

double FeedbackState::update_estimate(StreamId stream, uint32_t receiver, uint64_t remb_bps,
                                      int64_t now_us, double alpha) {
  if (remb_bps == 0) throw FeedbackError("REMB estimate must be positive");
  if (alpha <= 0.0 || alpha > 1.0) throw FeedbackError("alpha must be in (0,1]");
  auto& entry = estimates_[stream][receiver];
  if (entry.last_update_us == 0 && entry.ewma_bps == 0.0) {
    entry.ewma_bps = double(remb_bps);  // first sample initializes directly
  } else {
    entry.ewma_bps = alpha * double(remb_bps) + (1.0 - alpha) * entry.ewma_bps;
  }
  entry.last_update_us = now_us;
  return entry.ewma_bps;
}

uint32_t FeedbackState::select_best(StreamId stream, int64_t now_us) {
  auto it = estimates_.find(stream);
  if (it == estimates_.end() || it->second.empty()) {
    throw FeedbackError("no estimates for stream");
  }
  uint32_t best = 0;
  double best_ewma = -1.0;
  for (const auto& [receiver, entry] : it->second) {
    // map order makes the tie-break toward the lowest receiver id
    if (entry.ewma_bps > best_ewma) {
      best_ewma = entry.ewma_bps;
      best = receiver;
    }
  }
  auto sel = selected_.find(stream);
  if (sel == selected_.end() || sel->second != best) {
    SelectionChange ch;
    ch.time_us = now_us;
    ch.stream = stream;
    if (sel != selected_.end()) ch.old_receiver = sel->second;
    ch.new_receiver = best;
    changes_.push_back(ch);
    selected_[stream] = best;
  }
  return best;
}

std::optional<uint32_t> FeedbackState::selected_receiver(StreamId stream) const {
  auto it = selected_.find(stream);
  if (it == selected_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> FeedbackState::estimate(StreamId stream, uint32_t receiver) const {
  auto it = estimates_.find(stream);
  if (it == estimates_.end()) return std::nullopt;
  auto jt = it->second.find(receiver);
  if (jt == it->second.end()) return std::nullopt;
  return jt->second.ewma_bps;
}

std::optional<StreamId> StreamDirectory::stream_of_ssrc(uint32_t ssrc) const {
  for (const auto& [id, info] : streams) {
    if (uint32_t(id & 0xFFFFFFFF) == ssrc) return id;
  }
  return std::nullopt;
}

RtcpRoute route_rtcp(const wire::RtcpMessage& msg, uint32_t origin, const StreamDirectory& dir,
                     const FeedbackState& state) {
  RtcpRoute route;
  switch (msg.kind) {
    case wire::RtcpKind::SR:
    case wire::RtcpKind::SDES: {
      // sender-side reports: replicate to all receivers of the origin's
      // stream, entirely in the data plane
      auto stream = dir.streams.find(make_stream_id(origin, msg.sender_ssrc));
      if (stream == dir.streams.end()) {
        throw FeedbackError("unknown origin stream for sender report");
      }
      route.destinations = stream->second.receivers;
      return route;
    }
    case wire::RtcpKind::RR:
    case wire::RtcpKind::REMB: {
      route.copy_to_agent = true;
      uint32_t media_ssrc = msg.media_ssrc.value_or(
          msg.report_blocks.empty() ? 0 : msg.report_blocks.front().ssrc);
      auto stream_id = dir.stream_of_ssrc(media_ssrc);
      if (!stream_id.has_value()) return route;  // agent copy only
      auto selected = state.selected_receiver(*stream_id);
      if (selected.has_value() && *selected == origin) {
        route.destinations.push_back(dir.streams.at(*stream_id).sender);
      }
      return route;
    }
    case wire::RtcpKind::NACK:
    case wire::RtcpKind::PLI: {
      route.copy_to_agent = true;
      auto stream_id = dir.stream_of_ssrc(msg.media_ssrc.value_or(0));
      if (!stream_id.has_value()) {
        throw FeedbackError("feedback references unknown stream");
      }
      route.destinations.push_back(dir.streams.at(*stream_id).sender);
      return route;
    }
  }
  return route;
}

}  // namespace sfu::feedback
