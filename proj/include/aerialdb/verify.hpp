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
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aerialdb/config.hpp"
#include "aerialdb/hashing.hpp"
#include "aerialdb/planner.hpp"

namespace aerialdb {

struct PropertyResult {
  std::string name;
  bool passed = false;
  /// Informational checks never fail a report.
  bool informational = false;
  std::string detail;
  std::uint64_t seed = 0;
};

struct VerifyReport {
  std::vector<PropertyResult> results;
  bool passed() const noexcept;
  std::string text() const;
};

using PlannerFn =
    std::function<PlanAssignment(const ReplicaMap&, const EdgeSet&, Rng&)>;
using SpatialQueryFn = std::function<EdgeSet(
    const BoundingBox&, const HashConfig&, const VoronoiPartition&)>;

/// Returns a description of the first violation: a shard missing from the
/// plan, assigned twice, or assigned to an edge that is dead or does not
/// hold it. Shards with no live replica must be listed as unreachable.
std::optional<std::string> check_coverage(const ReplicaMap& shards,
                                          const EdgeSet& live,
                                          const PlanAssignment& plan);

/// Random shard -> replica map over `edges`, 3 distinct holders each; when
/// `degrade` is set, 1-2 edges are removed from the returned live set.
ReplicaMap random_replica_map(Rng& rng, const std::vector<EdgeId>& edges,
                              std::size_t shard_count, bool degrade,
                              EdgeSet& live);

PropertyResult verify_plan_coverage(
    std::uint64_t seed, std::size_t maps,
    const std::vector<std::pair<std::string, PlannerFn>>& planners);
PropertyResult verify_min_shards_dominance(std::uint64_t seed, std::size_t maps);
PropertyResult verify_algorithm_fixture();
PropertyResult verify_slice_agreement(
    std::uint64_t seed, std::size_t pairs, const HashConfig& cfg,
    const VoronoiPartition& partition,
    const SpatialQueryFn& query_side = spatial_query_edges);
PropertyResult verify_batch_equivalence(std::uint64_t seed,
                                        const std::vector<std::size_t>& sizes);
PropertyResult verify_replica_placement(std::uint64_t seed, std::size_t metas,
                                        const HashConfig& cfg,
                                        const VoronoiPartition& partition);
PropertyResult verify_voronoi_nearest(std::uint64_t seed, std::size_t points,
                                      const VoronoiPartition& partition);

/// Planners under test; the injected fault duplicates one assignment.
std::vector<std::pair<std::string, PlannerFn>> standard_planners(
    bool inject_duplicate = false);
/// Query-side slicing anchored at each query's own corner (a known bug).
EdgeSet misanchored_spatial_query_edges(const BoundingBox& b,
                                        const HashConfig& cfg,
                                        const VoronoiPartition& partition);

struct VerifyOptions {
  bool inject_duplicate_replica = false;
  bool inject_grid_anchor_bug = false;
  std::size_t coverage_maps = 10'000;
  std::size_t slice_pairs = 100'000;
  bool cluster_checks = true;
};

/// Runs every property at the scale of `cfg`.
VerifyReport verify(const ExperimentConfig& cfg, const VerifyOptions& opts = {});

}  // namespace aerialdb
