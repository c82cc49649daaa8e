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

#include <array>
#include <string>
#include <variant>
#include <vector>

#include "aerialdb/model.hpp"
#include "aerialdb/planner.hpp"
#include "aerialdb/query.hpp"
#include "aerialdb/store.hpp"

namespace aerialdb {

/// Version of the client-facing request/response schemas.
inline constexpr int kProtocolVersion = 1;

enum class MessageKind {
  replicate_shard,
  index_shard,
  lookup_index,
  exec_sub_query,
  heartbeat,
  insert_request,
  query_request,
  response,
};
std::string_view to_string(MessageKind k) noexcept;

struct QueryOptions {
  PlannerKind planner = PlannerKind::min_shards;
  /// LC-n threshold; 0 disables local execution.
  std::size_t local_threshold = 0;
  std::size_t batch_size = kDefaultBatchSize;
};

// Drone -> parent edge.
struct InsertRequest {
  ShardPayloadPtr shard;
};

struct InsertResponse {
  bool ok = false;
  std::string error;
  std::array<EdgeId, 3> replicas{};
  std::size_t index_edges = 0;
  std::size_t replica_retries = 0;
};

// Parent edge -> replica edge.
struct ReplicateShard {
  ShardPayloadPtr shard;
  ReplicaRole role = ReplicaRole::spatial;
};

// Parent edge -> index target.
struct IndexShard {
  ShardIndexEntry entry;
};

struct Ack {};

// Coordinator -> index holder. Only the bbox/range/shard-id filters and the
// combinator of `filter` are consulted.
struct LookupIndexRequest {
  Query filter;
};

struct LookupIndexResponse {
  std::vector<ShardIndexEntry> entries;
};

// Coordinator -> replica holder.
struct ExecSubQuery {
  SubQuery sub_query;
  std::size_t batch_size = kDefaultBatchSize;
};

struct SubQueryResponse {
  SubQueryResult result;
};

struct Heartbeat {};

// Client -> coordinator.
struct QueryRequest {
  Query query;
  QueryOptions options;
};

struct QueryStats {
  EdgeId coordinator{};
  LookupMode lookup_mode = LookupMode::broadcast;
  std::size_t lookup_edges = 0;
  std::size_t shards_matched = 0;
  std::size_t edges_queried = 0;
  double mean_shards_per_edge = 0.0;
  std::size_t max_shards_per_edge = 0;
  bool executed_locally = false;
  std::size_t replans = 0;
};

struct QueryResponse {
  bool ok = false;
  std::string error;
  std::vector<ResultRow> rows;
  std::vector<AggregateRow> aggregates;
  /// Matched shards that had no reachable replica; non-empty means partial.
  std::vector<std::string> unreachable_shards;
  QueryStats stats;

  bool partial() const noexcept { return !unreachable_shards.empty(); }
};

using Payload =
    std::variant<std::monostate, InsertRequest, InsertResponse, ReplicateShard,
                 IndexShard, Ack, LookupIndexRequest, LookupIndexResponse,
                 ExecSubQuery, SubQueryResponse, Heartbeat, QueryRequest,
                 QueryResponse>;

/// Approximate encoded size used by the transport's bandwidth model.
std::size_t wire_size(const Payload& p);

}  // namespace aerialdb
