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

#include <compare>
#include <cstdint>
#include <string_view>
#include <vector>

#include "aerialdb/geometry.hpp"
#include "aerialdb/model.hpp"
#include "aerialdb/types.hpp"

namespace aerialdb {

/// Deployment-wide hashing parameters. Every edge and client shares one
/// instance, which makes the three hash functions consistent system-wide.
struct HashConfig {
  std::int64_t tau_seconds = 300;
  double sigma_degrees = 0.005;
  GeoPoint grid_origin;
  Timestamp epoch_origin = 0;
  /// Strictly ascending; the position of an id is its hash index.
  std::vector<EdgeId> edge_ids;
  std::uint64_t hash_seed = 0;

  std::int64_t tau_ms() const noexcept { return tau_seconds * 1000; }
  std::size_t edge_count() const noexcept { return edge_ids.size(); }
  /// Throws Errc::invalid_config.
  void validate() const;
};

/// Cell of the global spatial grid: row counts sigma-steps north of the
/// grid origin, col counts steps east.
struct GridCell {
  std::int64_t row = 0;
  std::int64_t col = 0;

  friend auto operator<=>(const GridCell&, const GridCell&) = default;
};

struct SliceSet {
  std::vector<GridCell> spatial_cells;
  std::vector<std::int64_t> temporal_buckets;
};

/// H_i: edge_ids[xxh64(shard_id) mod n].
EdgeId hash_id(std::string_view shard_id, const HashConfig& cfg);
/// Hash of a temporal bucket id.
EdgeId hash_bucket(std::int64_t bucket, const HashConfig& cfg);
/// H_t: hash of the bucket holding `t`. Throws Errc::before_epoch.
EdgeId hash_temporal(Timestamp t, const HashConfig& cfg);
/// H_s: the Voronoi cell containing `p`.
EdgeId hash_spatial(GeoPoint p, const VoronoiPartition& partition);

/// floor((t - epoch_origin) / tau). Throws Errc::before_epoch.
std::int64_t bucket_of(Timestamp t, const HashConfig& cfg);
GridCell cell_of(GeoPoint p, const HashConfig& cfg);
BoundingBox cell_bounds(GridCell c, const HashConfig& cfg);
/// Point used to hash a grid cell: its centre, clamped into the region so
/// that cells straddling the region border still hash to an edge.
GeoPoint cell_representative(GridCell c, const HashConfig& cfg,
                             const BoundingBox& region);

/// Every global grid cell touched by `b`, row-major.
std::vector<GridCell> slice_bbox(const BoundingBox& b, const HashConfig& cfg);
/// Every bucket touched by `r`, ascending. Throws Errc::before_epoch when the
/// range starts before the epoch origin.
std::vector<std::int64_t> slice_range(const TimeRange& r, const HashConfig& cfg);
SliceSet slice(const ShardMeta& meta, const HashConfig& cfg);

/// Edges that must hold the index entry of a shard.
struct IndexTargets {
  EdgeSet spatial;
  EdgeSet temporal;
  EdgeId id{};

  /// Union of the three sets and the replica holders.
  EdgeSet all(const ShardIndexEntry& entry) const;
};

IndexTargets index_edges_for(const ShardIndexEntry& entry,
                             const HashConfig& cfg,
                             const VoronoiPartition& partition);

/// Query-side edge sets. A box is clipped to the region first and a range is
/// clamped to the epoch origin; empty when nothing remains.
EdgeSet spatial_query_edges(const BoundingBox& b, const HashConfig& cfg,
                            const VoronoiPartition& partition);
EdgeSet temporal_query_edges(const TimeRange& r, const HashConfig& cfg);

}  // namespace aerialdb
