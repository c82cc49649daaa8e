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

#include "aerialdb/index.hpp"

#include <algorithm>
#include <mutex>

namespace aerialdb {

ShardIndex::ShardIndex(double sigma_degrees, GeoPoint grid_origin) {
  grid_.sigma_degrees = sigma_degrees;
  grid_.grid_origin = grid_origin;
}

std::vector<GridCell> ShardIndex::cells_for(const BoundingBox& b) const {
  return slice_bbox(b, grid_);
}

void ShardIndex::link(Slot slot) {
  const ShardIndexEntry& e = entries_[slot];
  for (const GridCell& c : cells_for(e.bbox)) by_cell_[c].push_back(slot);
  const auto pos = std::lower_bound(by_start_.begin(), by_start_.end(),
                                    std::make_pair(e.range.start, slot));
  by_start_.insert(pos, {e.range.start, slot});
  max_duration_ = std::max(max_duration_, e.range.end - e.range.start);
}

void ShardIndex::unlink(Slot slot) {
  const ShardIndexEntry& e = entries_[slot];
  for (const GridCell& c : cells_for(e.bbox)) {
    auto& v = by_cell_[c];
    v.erase(std::remove(v.begin(), v.end(), slot), v.end());
    if (v.empty()) by_cell_.erase(c);
  }
  const auto pos = std::lower_bound(by_start_.begin(), by_start_.end(),
                                    std::make_pair(e.range.start, slot));
  if (pos != by_start_.end() && pos->second == slot) by_start_.erase(pos);
}

void ShardIndex::add(const ShardIndexEntry& entry) {
  std::unique_lock lock(mu_);
  const auto it = by_id_.find(entry.shard_id);
  if (it != by_id_.end()) {
    if (entries_[it->second] == entry) return;
    unlink(it->second);
    entries_[it->second] = entry;
    link(it->second);
    return;
  }
  const auto slot = static_cast<Slot>(entries_.size());
  entries_.push_back(entry);
  by_id_.emplace(entry.shard_id, slot);
  link(slot);
}

std::vector<ShardIndexEntry> ShardIndex::lookup_spatial(
    const BoundingBox& b) const {
  std::shared_lock lock(mu_);
  std::vector<Slot> hits;
  const GridCell lo = cell_of({b.south(), b.west()}, grid_);
  const GridCell hi = cell_of({b.north(), b.east()}, grid_);
  const double span = static_cast<double>(hi.row - lo.row + 1) *
                      static_cast<double>(hi.col - lo.col + 1);
  if (span > static_cast<double>(by_cell_.size())) {
    for (const auto& [cell, slots] : by_cell_)
      if (cell.row >= lo.row && cell.row <= hi.row && cell.col >= lo.col &&
          cell.col <= hi.col)
        hits.insert(hits.end(), slots.begin(), slots.end());
  } else {
    for (std::int64_t r = lo.row; r <= hi.row; ++r)
      for (std::int64_t c = lo.col; c <= hi.col; ++c) {
        const auto it = by_cell_.find({r, c});
        if (it != by_cell_.end())
          hits.insert(hits.end(), it->second.begin(), it->second.end());
      }
  }
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end()), hits.end());

  std::vector<ShardIndexEntry> out;
  for (Slot s : hits)
    if (bbox_intersects(entries_[s].bbox, b)) out.push_back(entries_[s]);
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return x.shard_id < y.shard_id;
  });
  return out;
}

std::vector<ShardIndexEntry> ShardIndex::lookup_temporal(
    const TimeRange& r) const {
  std::shared_lock lock(mu_);
  std::vector<ShardIndexEntry> out;
  // Any entry overlapping r starts in [r.start - max_duration, r.end].
  const Timestamp from = r.start - max_duration_;
  auto it = std::lower_bound(
      by_start_.begin(), by_start_.end(), from,
      [](const std::pair<Timestamp, Slot>& p, Timestamp t) { return p.first < t; });
  for (; it != by_start_.end() && it->first <= r.end; ++it) {
    const ShardIndexEntry& e = entries_[it->second];
    if (e.range.intersects(r)) out.push_back(e);
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return x.shard_id < y.shard_id;
  });
  return out;
}

std::optional<ShardIndexEntry> ShardIndex::lookup_id(
    const std::string& shard_id) const {
  std::shared_lock lock(mu_);
  const auto it = by_id_.find(shard_id);
  if (it == by_id_.end()) return std::nullopt;
  return entries_[it->second];
}

std::size_t ShardIndex::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

}  // namespace aerialdb
