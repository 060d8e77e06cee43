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

#ifndef SFU_PRE_ENGINE_HPP
#define SFU_PRE_ENGINE_HPP

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace sfu::pre {

enum class PreError {
  TreeBudgetExhausted,
  L1BudgetExhausted,
  DuplicateMgid,
  DuplicateRidPort,
  RidOutOfRange,
  UnknownMgid,
};

class PreException : public std::runtime_error {
 public:
  PreException(PreError code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  PreError code() const { return code_; }

 private:
  PreError code_;
};

// Replication-engine budgets with the hardware defaults: 64K trees, 16.8M
// L1 nodes, 64K RIDs per tree.
struct PreResources {
  uint64_t max_trees = 65536;
  uint64_t max_l1_nodes_total = uint64_t(1) << 24;
  uint64_t max_rids_per_tree = 65536;
  uint64_t used_trees = 0;
  uint64_t used_l1_nodes = 0;
};

struct L1Node {
  uint64_t node_id = 0;  // engine-assigned, unique across the engine
  uint32_t rid = 0;      // unique per (rid, egress_port) within a tree
  uint32_t l1_xid = 0;
  bool prune_enabled = false;
  uint32_t egress_port = 0;
};

struct ReplicationTree {
  uint32_t mgid = 0;
  std::vector<L1Node> l1_nodes;
};

// Ingress-pipeline assignment for one packet: which tree, which L1 branch
// group to exclude, and the (rid, ports) pair pruned at L2.
struct PacketReplicationMeta {
  uint32_t mgid = 0;
  uint32_t l1_xid = 0;
  uint32_t rid = 0;
  std::set<uint32_t> l2_xid_ports;
};

struct Replica {
  uint32_t egress_port = 0;
  uint32_t rid = 0;

  bool operator==(const Replica&) const = default;
  auto operator<=>(const Replica&) const = default;
};

class Engine {
 public:
  Engine() = default;
  explicit Engine(PreResources res) : res_(res) {}

  const ReplicationTree& create_tree(uint32_t mgid, std::vector<L1Node> nodes);
  void destroy_tree(uint32_t mgid);

  // L1 prune: skip nodes whose enabled XID equals the packet's. L2 prune:
  // skip nodes matching the packet's (rid, port) exclusion pair.
  std::vector<Replica> replicate(const PacketReplicationMeta& meta) const;

  bool has_tree(uint32_t mgid) const { return trees_.count(mgid) != 0; }
  const ReplicationTree& tree(uint32_t mgid) const;
  const PreResources& resources() const { return res_; }
  size_t tree_count() const { return trees_.size(); }

  std::string dump_json() const;

 private:
  PreResources res_;
  std::map<uint32_t, ReplicationTree> trees_;
  uint64_t next_node_id_ = 1;
};

}  // namespace sfu::pre

#endif  // SFU_PRE_ENGINE_HPP
