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

#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "aerialdb/hashing.hpp"
#include "aerialdb/model.hpp"

namespace aerialdb {

/// In-memory tri-index over shard metadata held by one edge: a grid-bucketed
/// spatial map, a start-sorted interval list and a shard-id map. Lookups
/// return exactly the entries that intersect (closed) the argument.
class ShardIndex {
 public:
  /// Grid pitch and origin should match the deployment's slicing grid.
  ShardIndex(double sigma_degrees, GeoPoint grid_origin);
  explicit ShardIndex(const HashConfig& cfg)
      : ShardIndex(cfg.sigma_degrees, cfg.grid_origin) {}

  /// Adds or replaces (same shard id) an entry.
  void add(const ShardIndexEntry& entry);

  std::vector<ShardIndexEntry> lookup_spatial(const BoundingBox& b) const;
  std::vector<ShardIndexEntry> lookup_temporal(const TimeRange& r) const;
  std::optional<ShardIndexEntry> lookup_id(const std::string& shard_id) const;

  std::size_t size() const;

 private:
  struct CellHash {
    std::size_t operator()(const GridCell& c) const noexcept {
      return std::hash<std::int64_t>{}(c.row * 1000003 + c.col);
    }
  };
  struct CellEq {
    bool operator()(const GridCell& a, const GridCell& b) const noexcept {
      return a.row == b.row && a.col == b.col;
    }
  };
  using Slot = std::uint32_t;

  std::vector<GridCell> cells_for(const BoundingBox& b) const;
  void unlink(Slot slot);
  void link(Slot slot);

  HashConfig grid_;
  mutable std::shared_mutex mu_;
  std::vector<ShardIndexEntry> entries_;
  std::unordered_map<std::string, Slot> by_id_;
  std::unordered_map<GridCell, std::vector<Slot>, CellHash, CellEq> by_cell_;
  // (start, slot), sorted; with the longest duration seen this bounds the
  // candidate window of any interval query.
  std::vector<std::pair<Timestamp, Slot>> by_start_;
  Timestamp max_duration_ = 0;
};

}  // namespace aerialdb
