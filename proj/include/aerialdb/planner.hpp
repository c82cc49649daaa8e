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
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "aerialdb/geometry.hpp"
#include "aerialdb/hashing.hpp"
#include "aerialdb/query.hpp"
#include "aerialdb/rng.hpp"

namespace aerialdb {

/// Next edge after `from` in ascending id order (wrapping) that is live and
/// not excluded. Throws Errc::insufficient_live_edges when none exists.
EdgeId successor(EdgeId from, const HashConfig& cfg, const EdgeSet& live,
                 const EdgeSet& exclude);

/// Replica triple in (spatial, temporal, shardID) order. Colliding or
/// non-live candidates are replaced by their successor. Throws
/// Errc::insufficient_live_edges with fewer than three live edges.
std::array<EdgeId, 3> choose_replicas(const ShardMeta& meta,
                                      const VoronoiPartition& partition,
                                      const HashConfig& cfg,
                                      const EdgeSet& live);

enum class LookupMode { spatial, temporal, id, union_all, broadcast };
std::string_view to_string(LookupMode m) noexcept;

/// Edges to interrogate for the index entries matching a query.
struct LookupPlan {
  LookupMode mode = LookupMode::broadcast;
  EdgeSet edges;
  EdgeSet spatial;
  EdgeSet temporal;
  EdgeSet id;
};

/// AND: the smallest candidate set whose members are all live (ties prefer
/// id, then temporal, then spatial). OR: the union of the candidate sets.
/// Falls back to every live edge when no usable set exists. Throws
/// Errc::broadcast_query when the query has no index filter.
LookupPlan lookup_edge_sets(const Query& q, const HashConfig& cfg,
                            const VoronoiPartition& partition,
                            const EdgeSet& live);

/// shard id -> edges holding a replica of it.
using ReplicaMap = std::map<std::string, std::vector<EdgeId>>;

struct PlanAssignment {
  std::map<EdgeId, std::set<std::string>> assignment;
  /// Shards without any live replica, ascending.
  std::vector<std::string> unreachable;

  std::size_t shard_count() const noexcept;
  std::size_t edge_count() const noexcept { return assignment.size(); }
  double mean_shards_per_edge() const noexcept;
  std::size_t max_shards_per_edge() const noexcept;
};

enum class PlannerKind { random, min_shards, min_edges };
std::string_view to_string(PlannerKind p) noexcept;
/// Accepts "random", "minshards", "minedges". Throws Errc::invalid_argument.
PlannerKind parse_planner(std::string_view name);

PlanAssignment plan_random(const ReplicaMap& shards, const EdgeSet& live,
                           Rng& rng);
PlanAssignment plan_min_shards(const ReplicaMap& shards, const EdgeSet& live);
PlanAssignment plan_min_edges(const ReplicaMap& shards, const EdgeSet& live);
PlanAssignment make_plan(PlannerKind kind, const ReplicaMap& shards,
                         const EdgeSet& live, Rng& rng);

/// RC picks a uniformly random live edge; LC-n picks the live edge nearest
/// the query's bbox centroid and lets it answer locally when it holds every
/// matched shard and there are at most n of them.
struct CoordinatorPolicy {
  bool locality_aware = false;
  std::size_t local_threshold = 0;

  static CoordinatorPolicy random() { return {false, 0}; }
  static CoordinatorPolicy local(std::size_t n) { return {true, n}; }
  friend bool operator==(const CoordinatorPolicy&,
                         const CoordinatorPolicy&) = default;
};
std::string to_string(const CoordinatorPolicy& p);
/// Accepts "rc" and "lc-<n>". Throws Errc::invalid_argument.
CoordinatorPolicy parse_coordinator(std::string_view name);

EdgeId select_coordinator(const Query& q, const CoordinatorPolicy& policy,
                          const HashConfig& cfg,
                          const VoronoiPartition& partition,
                          const EdgeSet& live, Rng& rng);

}  // namespace aerialdb
