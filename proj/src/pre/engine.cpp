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

#include "sfu/pre/engine.hpp"

#include <sstream>

#include "json.hpp"

namespace sfu::pre {

const ReplicationTree& Engine::create_tree(uint32_t mgid, std::vector<L1Node> nodes) {
  if (trees_.count(mgid)) {
    throw PreException(PreError::DuplicateMgid, "mgid already in use: " + std::to_string(mgid));
  }
  if (res_.used_trees + 1 > res_.max_trees) {
    throw PreException(PreError::TreeBudgetExhausted, "multicast tree budget exhausted");
  }
  if (res_.used_l1_nodes + nodes.size() > res_.max_l1_nodes_total) {
    throw PreException(PreError::L1BudgetExhausted, "L1 node budget exhausted");
  }
  std::set<std::pair<uint32_t, uint32_t>> rid_port;
  for (const auto& n : nodes) {
    if (n.rid >= res_.max_rids_per_tree) {
      throw PreException(PreError::RidOutOfRange,
                         "rid " + std::to_string(n.rid) + " exceeds per-tree budget");
    }
    if (!rid_port.insert({n.rid, n.egress_port}).second) {
      throw PreException(PreError::DuplicateRidPort,
                         "duplicate (rid, port) within tree " + std::to_string(mgid));
    }
  }
  for (auto& n : nodes) n.node_id = next_node_id_++;
  res_.used_trees += 1;
  res_.used_l1_nodes += nodes.size();
  auto [it, _] = trees_.emplace(mgid, ReplicationTree{mgid, std::move(nodes)});
  return it->second;
}

void Engine::destroy_tree(uint32_t mgid) {
  auto it = trees_.find(mgid);
  if (it == trees_.end()) {
    throw PreException(PreError::UnknownMgid, "no tree with mgid " + std::to_string(mgid));
  }
  res_.used_trees -= 1;
  res_.used_l1_nodes -= it->second.l1_nodes.size();
  trees_.erase(it);
}

const ReplicationTree& Engine::tree(uint32_t mgid) const {
  auto it = trees_.find(mgid);
  if (it == trees_.end()) {
    throw PreException(PreError::UnknownMgid, "no tree with mgid " + std::to_string(mgid));
  }
  return it->second;
}

std::vector<Replica> Engine::replicate(const PacketReplicationMeta& meta) const {
  const ReplicationTree& t = tree(meta.mgid);
  std::vector<Replica> out;
  out.reserve(t.l1_nodes.size());
  for (const auto& n : t.l1_nodes) {
    if (n.prune_enabled && n.l1_xid == meta.l1_xid) continue;
    if (n.rid == meta.rid && meta.l2_xid_ports.count(n.egress_port)) continue;
    out.push_back(Replica{n.egress_port, n.rid});
  }
  return out;
}

std::string Engine::dump_json() const {
  nlohmann::ordered_json j;
  j["resources"] = {{"max_trees", res_.max_trees},
                    {"max_l1_nodes_total", res_.max_l1_nodes_total},
                    {"max_rids_per_tree", res_.max_rids_per_tree},
                    {"used_trees", res_.used_trees},
                    {"used_l1_nodes", res_.used_l1_nodes}};
  j["trees"] = nlohmann::ordered_json::array();
  for (const auto& [mgid, t] : trees_) {
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (const auto& n : t.l1_nodes) {
      nodes.push_back({{"node_id", n.node_id},
                       {"rid", n.rid},
                       {"l1_xid", n.l1_xid},
                       {"prune_enabled", n.prune_enabled},
                       {"egress_port", n.egress_port}});
    }
    j["trees"].push_back({{"mgid", mgid}, {"l1_nodes", nodes}});
  }
  return j.dump(2);
}

}  // namespace sfu::pre
