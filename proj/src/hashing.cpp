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

#include "aerialdb/hashing.hpp"

#include <algorithm>
#include <cmath>

#include "aerialdb/errors.hpp"
#include "aerialdb/xxhash64.hpp"

namespace aerialdb {

void HashConfig::validate() const {
  if (tau_seconds <= 0)
    throw Error(Errc::invalid_config, "tau_seconds must be positive");
  if (!(sigma_degrees > 0.0))
    throw Error(Errc::invalid_config, "sigma_degrees must be positive");
  if (edge_ids.empty())
    throw Error(Errc::invalid_config, "edge list must not be empty");
  for (std::size_t i = 1; i < edge_ids.size(); ++i)
    if (!(edge_ids[i - 1] < edge_ids[i]))
      throw Error(Errc::invalid_config,
                  "edge ids must be strictly ascending and unique");
}

namespace {

EdgeId pick(std::uint64_t h, const HashConfig& cfg) {
  return cfg.edge_ids[static_cast<std::size_t>(h % cfg.edge_ids.size())];
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

constexpr double kMaxQuerySlices = 1 << 20;

std::int64_t grid_index(double v, double origin, double pitch) {
  return static_cast<std::int64_t>(std::floor((v - origin) / pitch));
}

}  // namespace

EdgeId hash_id(std::string_view shard_id, const HashConfig& cfg) {
  return pick(xxh64(shard_id, cfg.hash_seed), cfg);
}

EdgeId hash_bucket(std::int64_t bucket, const HashConfig& cfg) {
  return pick(xxh64_int(bucket, cfg.hash_seed), cfg);
}

std::int64_t bucket_of(Timestamp t, const HashConfig& cfg) {
  if (t < cfg.epoch_origin)
    throw Error(Errc::before_epoch, "timestamp precedes the epoch origin");
  return floor_div(t - cfg.epoch_origin, cfg.tau_ms());
}

EdgeId hash_temporal(Timestamp t, const HashConfig& cfg) {
  return hash_bucket(bucket_of(t, cfg), cfg);
}

EdgeId hash_spatial(GeoPoint p, const VoronoiPartition& partition) {
  return partition.locate(p);
}

GridCell cell_of(GeoPoint p, const HashConfig& cfg) {
  return {grid_index(p.lat, cfg.grid_origin.lat, cfg.sigma_degrees),
          grid_index(p.lon, cfg.grid_origin.lon, cfg.sigma_degrees)};
}

BoundingBox cell_bounds(GridCell c, const HashConfig& cfg) {
  const double s = cfg.sigma_degrees;
  const double south = cfg.grid_origin.lat + static_cast<double>(c.row) * s;
  const double west = cfg.grid_origin.lon + static_cast<double>(c.col) * s;
  return BoundingBox::from_bounds(south, west, south + s, west + s);
}

GeoPoint cell_representative(GridCell c, const HashConfig& cfg,
                             const BoundingBox& region) {
  const GeoPoint mid = bbox_midpoint(cell_bounds(c, cfg));
  return {std::clamp(mid.lat, region.south(), region.north()),
          std::clamp(mid.lon, region.west(), region.east())};
}

std::vector<GridCell> slice_bbox(const BoundingBox& b, const HashConfig& cfg) {
  const GridCell lo = cell_of({b.south(), b.west()}, cfg);
  const GridCell hi = cell_of({b.north(), b.east()}, cfg);
  std::vector<GridCell> out;
  out.reserve(static_cast<std::size_t>((hi.row - lo.row + 1) *
                                       (hi.col - lo.col + 1)));
  for (std::int64_t r = lo.row; r <= hi.row; ++r)
    for (std::int64_t c = lo.col; c <= hi.col; ++c) out.push_back({r, c});
  return out;
}

std::vector<std::int64_t> slice_range(const TimeRange& r,
                                      const HashConfig& cfg) {
  const std::int64_t lo = bucket_of(r.start, cfg);
  const std::int64_t hi = bucket_of(r.end, cfg);
  std::vector<std::int64_t> out;
  out.reserve(static_cast<std::size_t>(hi - lo + 1));
  for (std::int64_t b = lo; b <= hi; ++b) out.push_back(b);
  return out;
}

SliceSet slice(const ShardMeta& meta, const HashConfig& cfg) {
  return {slice_bbox(meta.bbox, cfg), slice_range(meta.range, cfg)};
}

EdgeSet IndexTargets::all(const ShardIndexEntry& entry) const {
  EdgeSet out = spatial;
  out.insert(temporal.begin(), temporal.end());
  out.insert(id);
  out.insert(entry.replicas.begin(), entry.replicas.end());
  return out;
}

IndexTargets index_edges_for(const ShardIndexEntry& entry,
                             const HashConfig& cfg,
                             const VoronoiPartition& partition) {
  IndexTargets t;
  for (const GridCell& c : slice_bbox(entry.bbox, cfg))
    t.spatial.insert(
        partition.locate(cell_representative(c, cfg, partition.region())));
  t.spatial.insert(entry.replica(ReplicaRole::spatial));
  for (std::int64_t b : slice_range(entry.range, cfg))
    t.temporal.insert(hash_bucket(b, cfg));
  t.temporal.insert(entry.replica(ReplicaRole::temporal));
  t.id = hash_id(entry.shard_id, cfg);
  return t;
}

EdgeSet spatial_query_edges(const BoundingBox& b, const HashConfig& cfg,
                            const VoronoiPartition& partition) {
  EdgeSet out;
  const auto clipped = bbox_intersection(b, partition.region());
  if (!clipped) return out;
  const GridCell lo = cell_of({clipped->south(), clipped->west()}, cfg);
  const GridCell hi = cell_of({clipped->north(), clipped->east()}, cfg);
  // Past this many slices the set is all edges in practice; a superset is
  // always safe for lookups.
  const double cells = static_cast<double>(hi.row - lo.row + 1) *
                       static_cast<double>(hi.col - lo.col + 1);
  if (cells > kMaxQuerySlices)
    return EdgeSet(cfg.edge_ids.begin(), cfg.edge_ids.end());
  for (const GridCell& c : slice_bbox(*clipped, cfg))
    out.insert(
        partition.locate(cell_representative(c, cfg, partition.region())));
  return out;
}

EdgeSet temporal_query_edges(const TimeRange& r, const HashConfig& cfg) {
  EdgeSet out;
  if (r.end < cfg.epoch_origin) return out;
  const TimeRange clamped{std::max(r.start, cfg.epoch_origin), r.end};
  if (static_cast<double>(clamped.end - clamped.start) /
          static_cast<double>(cfg.tau_ms()) >
      kMaxQuerySlices)
    return EdgeSet(cfg.edge_ids.begin(), cfg.edge_ids.end());
  for (std::int64_t b : slice_range(clamped, cfg))
    out.insert(hash_bucket(b, cfg));
  return out;
}

}  // namespace aerialdb
