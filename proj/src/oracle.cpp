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

#include "aerialdb/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aerialdb {

void Oracle::add(const Shard& shard) {
  Entry e;
  e.shard_id = shard.shard_id;
  e.south = e.west = std::numeric_limits<double>::infinity();
  e.north = e.east = -std::numeric_limits<double>::infinity();
  e.first = std::numeric_limits<Timestamp>::max();
  e.last = std::numeric_limits<Timestamp>::min();

  std::map<std::size_t, std::size_t> column_of;  // global id -> local column
  for (const auto& t : shard.tuples) {
    for (const auto& [name, v] : t.fields) {
      auto [it, fresh] = field_ids_.try_emplace(name, field_names_.size());
      if (fresh) field_names_.push_back(name);
      column_of.try_emplace(it->second, 0);
    }
  }
  for (auto& [global, local] : column_of) {
    local = e.columns.size();
    e.columns.push_back(global);
  }
  e.values.assign(shard.tuples.size() * e.columns.size(),
                  std::numeric_limits<double>::quiet_NaN());
  for (std::uint32_t i = 0; i < shard.tuples.size(); ++i) {
    const Tuple& t = shard.tuples[i];
    e.rows.push_back({t.timestamp, t.location.lat, t.location.lon, i});
    e.south = std::min(e.south, t.location.lat);
    e.north = std::max(e.north, t.location.lat);
    e.west = std::min(e.west, t.location.lon);
    e.east = std::max(e.east, t.location.lon);
    e.first = std::min(e.first, t.timestamp);
    e.last = std::max(e.last, t.timestamp);
    for (const auto& [name, v] : t.fields) {
      const std::size_t col = column_of.at(field_ids_.at(name));
      e.values[i * e.columns.size() + col] = v;
    }
  }
  tuples_ += shard.tuples.size();
  shards_.push_back(std::move(e));
}

bool Oracle::row_matches(const Query& q, const Entry& e, std::size_t r) const {
  const Row& row = e.rows[r];
  bool in_box = false;
  if (q.bbox) {
    in_box = row.lat >= q.bbox->south() && row.lat <= q.bbox->north() &&
             row.lon >= q.bbox->west() && row.lon <= q.bbox->east();
  }
  const bool in_time =
      q.range && row.timestamp >= q.range->start && row.timestamp <= q.range->end;
  const bool id_hit = q.shard_id && *q.shard_id == e.shard_id;

  bool keep;
  if (q.combinator == Combinator::any_of) {
    keep = in_box || in_time || id_hit;
  } else {
    keep = (!q.bbox || in_box) && (!q.range || in_time) &&
           (!q.shard_id || id_hit);
  }
  if (!keep) return false;

  for (const auto& p : q.field_predicates) {
    auto id = field_ids_.find(p.field);
    if (id == field_ids_.end()) return false;
    auto col = std::find(e.columns.begin(), e.columns.end(), id->second);
    if (col == e.columns.end()) return false;
    const double v =
        e.values[r * e.columns.size() +
                 static_cast<std::size_t>(col - e.columns.begin())];
    if (std::isnan(v)) return false;
    bool ok = false;
    switch (p.op) {
      case Comparator::lt: ok = v < p.value; break;
      case Comparator::le: ok = v <= p.value; break;
      case Comparator::eq: ok = v == p.value; break;
      case Comparator::ge: ok = v >= p.value; break;
      case Comparator::gt: ok = v > p.value; break;
    }
    if (!ok) return false;
  }
  return true;
}

std::vector<RowKey> Oracle::evaluate(const Query& q) const {
  std::vector<RowKey> out;
  for (const Entry& e : shards_) {
    // Cheap rejection for AND queries; rows decide everything else.
    if (q.combinator == Combinator::all_of) {
      if (q.shard_id && *q.shard_id != e.shard_id) continue;
      if (q.range && (e.last < q.range->start || e.first > q.range->end)) {
        continue;
      }
      if (q.bbox && (e.north < q.bbox->south() || e.south > q.bbox->north() ||
                     e.east < q.bbox->west() || e.west > q.bbox->east())) {
        continue;
      }
    }
    for (std::size_t r = 0; r < e.rows.size(); ++r) {
      if (row_matches(q, e, r)) {
        out.push_back({e.rows[r].timestamp, e.shard_id, e.rows[r].ordinal});
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<RowKey> row_keys(const std::vector<ResultRow>& rows) {
  std::vector<RowKey> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    out.push_back({r.tuple.timestamp, r.tuple.shard_id, r.ordinal});
  }
  return out;
}

ResultScore score(std::vector<RowKey> returned,
                  const std::vector<RowKey>& expected) {
  ResultScore s;
  s.expected = expected.size();
  s.returned = returned.size();
  std::sort(returned.begin(), returned.end());
  auto last = std::unique(returned.begin(), returned.end());
  s.duplicates = static_cast<std::size_t>(returned.end() - last);
  returned.erase(last, returned.end());
  std::size_t i = 0, j = 0;
  while (i < returned.size() && j < expected.size()) {
    if (returned[i] == expected[j]) {
      ++s.matched;
      ++i;
      ++j;
    } else if (returned[i] < expected[j]) {
      ++s.extra;
      ++i;
    } else {
      ++s.missing;
      ++j;
    }
  }
  s.extra += returned.size() - i;
  s.missing += expected.size() - j;
  return s;
}

}  // namespace aerialdb
