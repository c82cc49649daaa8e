// Licensed under the Apache License, Version 2.0 (the "License"); you may not
// use this file except in compliance with the License. You may obtain a copy of
// the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations under
// the License.

#pragma once

#include <cstdint>
#include <memory>

#include "aerialdb/geometry.hpp"
#include "aerialdb/hashing.hpp"
#include "aerialdb/index.hpp"
#include "aerialdb/protocol.hpp"
#include "aerialdb/rng.hpp"
#include "aerialdb/store.hpp"
#include "aerialdb/transport.hpp"

namespace aerialdb {

/// Virtual processing time charged by an edge for each kind of work.
struct NodeCostModel {
  SimTime lookup = std::chrono::microseconds(200);
  SimTime index_add = std::chrono::microseconds(50);
  SimTime insert_per_tuple = std::chrono::microseconds(10);
  SimTime sub_query_base = std::chrono::microseconds(2000);
  SimTime sub_query_per_shard = std::chrono::microseconds(200);
  SimTime sub_query_per_tuple = std::chrono::microseconds(2);
};

/// Static, deployment-wide knowledge shared by every edge.
struct Deployment {
  HashConfig hash;
  VoronoiPartition partition;
  NodeCostModel cost;
  std::uint64_t seed = 0;
};

/// Per-edge counters of stored replicas by placement role.
struct ReplicaCounts {
  std::size_t spatial = 0;
  std::size_t temporal = 0;
  std::size_t id = 0;
  std::size_t total() const noexcept { return spatial + temporal + id; }
};

/// One edge server: a store, a shard index and the insert / query
/// coordination protocol, driven entirely by transport messages.
class EdgeNode {
 public:
  EdgeNode(EdgeId id, Transport& transport,
           std::shared_ptr<const Deployment> deployment);

  EdgeNode(const EdgeNode&) = delete;
  EdgeNode& operator=(const EdgeNode&) = delete;

  EdgeId id() const noexcept { return id_; }
  const Store& store() const noexcept { return store_; }
  const ShardIndex& index() const noexcept { return index_; }
  const ReplicaCounts& replica_counts() const noexcept { return counts_; }

 private:
  struct InsertOp;
  struct QueryOp;

  void on_message(Message&& m, const Responder& r);

  void handle_insert(InsertRequest req, const Responder& r);
  void replicate(const std::shared_ptr<InsertOp>& op, std::size_t slot);
  void index_phase(const std::shared_ptr<InsertOp>& op);

  void handle_query(QueryRequest req, const Responder& r);
  void lookup_phase(const std::shared_ptr<QueryOp>& op, const EdgeSet& edges,
                    bool fallback);
  void plan_phase(const std::shared_ptr<QueryOp>& op);
  void dispatch(const std::shared_ptr<QueryOp>& op, const PlanAssignment& plan);
  void finish_query(const std::shared_ptr<QueryOp>& op);

  void on_replicate(ReplicateShard msg, const Responder& r);
  void on_index(IndexShard msg, const Responder& r);
  void on_lookup(LookupIndexRequest msg, const Responder& r);
  void on_sub_query(ExecSubQuery msg, const Responder& r);

  Message make(MessageKind kind, EdgeId to, Payload payload) const;

  EdgeId id_;
  Transport& transport_;
  std::shared_ptr<const Deployment> dep_;
  Store store_;
  ShardIndex index_;
  ReplicaCounts counts_;
  Rng rng_;
};

}  // namespace aerialdb
