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

#include "aerialdb/store.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "aerialdb/errors.hpp"

namespace aerialdb {

void Store::insert_shard(const Shard& shard) {
  insert_payload(ShardPayload::from_shard(shard));
}

void Store::insert_payload(ShardPayloadPtr payload) {
  if (!payload) throw Error(Errc::invalid_shard, "null shard payload");
  std::unique_lock lock(mu_);
  auto [it, inserted] = shards_.try_emplace(payload->shard_id(), payload);
  if (!inserted) {
    tuples_ -= it->second->size();
    it->second = payload;
  }
  tuples_ += payload->size();
}

namespace {

struct Accumulator {
  std::size_t matched = 0;
  std::size_t values = 0;
  double sum = 0.0;
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();

  void add(double v) {
    ++values;
    sum += v;
    min = std::min(min, v);
    max = std::max(max, v);
  }
};

}  // namespace

SubQueryResult Store::execute(const SubQuery& sq) const {
  std::shared_lock lock(mu_);
  SubQueryResult r = execute_unlocked(sq);
  r.canonicalize();
  return r;
}

SubQueryResult Store::execute_unlocked(const SubQuery& sq) const {
  SubQueryResult out;
  const bool any = sq.combinator == Combinator::any_of;
  const bool has_filter = sq.time || sq.bbox || sq.shard_filter;

  for (const std::string& id : sq.shard_ids) {
    const auto it = shards_.find(id);
    if (it == shards_.end()) continue;
    const ShardPayload& p = *it->second;

    const bool id_hit = sq.shard_filter && *sq.shard_filter == id;
    const bool time_may = sq.time && sq.time->intersects(p.range());
    const bool box_may = sq.bbox && bbox_intersects(*sq.bbox, p.bbox());
    if (any) {
      if (has_filter && !id_hit && !time_may && !box_may) continue;
    } else {
      if ((sq.shard_filter && !id_hit) || (sq.time && !time_may) ||
          (sq.bbox && !box_may))
        continue;
    }

    std::size_t first = 0;
    std::size_t last = p.size();
    if (!any && sq.time) {
      // Rows are time-sorted, so AND-combined time filters bound the scan.
      std::size_t lo = 0, hi = p.size();
      while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (p.timestamp(mid) < sq.time->start) lo = mid + 1; else hi = mid;
      }
      first = lo;
      hi = p.size();
      while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (p.timestamp(mid) <= sq.time->end) lo = mid + 1; else hi = mid;
      }
      last = lo;
    }

    std::vector<std::size_t> pred_cols;
    pred_cols.reserve(sq.field_predicates.size());
    for (const FieldPredicate& fp : sq.field_predicates)
      pred_cols.push_back(p.field_index(fp.field));
    std::size_t agg_col = ShardPayload::npos;
    if (sq.aggregation) agg_col = p.field_index(sq.aggregation->field);

    Accumulator acc;
    for (std::size_t row = first; row < last; ++row) {
      ++out.tuples_scanned;
      const bool in_time = sq.time && sq.time->contains(p.timestamp(row));
      const bool in_box = sq.bbox && sq.bbox->contains(p.location(row));
      bool keep;
      if (!has_filter) {
        keep = true;
      } else if (any) {
        keep = id_hit || in_time || in_box;
      } else {
        keep = (!sq.time || in_time) && (!sq.bbox || in_box);
      }
      if (!keep) continue;
      for (std::size_t k = 0; k < pred_cols.size() && keep; ++k) {
        if (pred_cols[k] == ShardPayload::npos) {
          keep = false;
          break;
        }
        const double v = p.value(row, pred_cols[k]);
        keep = !std::isnan(v) && sq.field_predicates[k].test(v);
      }
      if (!keep) continue;

      if (sq.aggregation) {
        ++acc.matched;
        if (agg_col != ShardPayload::npos) {
          const double v = p.value(row, agg_col);
          if (!std::isnan(v)) acc.add(v);
        }
      } else {
        out.rows.push_back({p.tuple(row), p.ordinal(row)});
      }
    }

    if (sq.aggregation) {
      const Aggregation& ag = *sq.aggregation;
      AggregateRow row{id, ag.fn, ag.field, 0.0, 0};
      if (ag.fn == AggregateFn::count) {
        if (acc.matched == 0) continue;
        row.count = acc.matched;
        row.value = static_cast<double>(acc.matched);
      } else {
        if (acc.values == 0) continue;
        row.count = acc.values;
        switch (ag.fn) {
          case AggregateFn::min: row.value = acc.min; break;
          case AggregateFn::max: row.value = acc.max; break;
          case AggregateFn::sum: row.value = acc.sum; break;
          case AggregateFn::mean:
            row.value = acc.sum / static_cast<double>(acc.values);
            break;
          case AggregateFn::count: break;
        }
      }
      out.aggregates.push_back(std::move(row));
    }
  }
  return out;
}

std::size_t Store::batch_count(std::size_t shard_ids, std::size_t batch_size) {
  if (batch_size == 0)
    throw Error(Errc::invalid_argument, "batch size must be at least 1");
  return (shard_ids + batch_size - 1) / batch_size;
}

SubQueryResult Store::batch_execute(const SubQuery& sq,
                                    std::size_t batch_size) const {
  const std::size_t groups = batch_count(sq.shard_ids.size(), batch_size);
  std::shared_lock lock(mu_);
  if (groups <= 1) {
    SubQueryResult r = execute_unlocked(sq);
    r.canonicalize();
    return r;
  }
  // Groups are disjoint and read-only, so they could be evaluated on separate
  // workers; results are merged in canonical order either way.
  SubQueryResult merged;
  SubQuery group = sq;
  auto it = sq.shard_ids.begin();
  for (std::size_t g = 0; g < groups; ++g) {
    group.shard_ids.clear();
    for (std::size_t k = 0; k < batch_size && it != sq.shard_ids.end(); ++k)
      group.shard_ids.insert(*it++);
    SubQueryResult part = execute_unlocked(group);
    merged.tuples_scanned += part.tuples_scanned;
    std::move(part.rows.begin(), part.rows.end(),
              std::back_inserter(merged.rows));
    std::move(part.aggregates.begin(), part.aggregates.end(),
              std::back_inserter(merged.aggregates));
  }
  merged.canonicalize();
  return merged;
}

bool Store::contains(const std::string& shard_id) const {
  std::shared_lock lock(mu_);
  return shards_.count(shard_id) != 0;
}

ShardPayloadPtr Store::shard(const std::string& shard_id) const {
  std::shared_lock lock(mu_);
  const auto it = shards_.find(shard_id);
  return it == shards_.end() ? nullptr : it->second;
}

std::size_t Store::shard_count() const {
  std::shared_lock lock(mu_);
  return shards_.size();
}

std::size_t Store::tuple_count() const {
  std::shared_lock lock(mu_);
  return tuples_;
}

std::vector<std::string> Store::shard_ids() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  out.reserve(shards_.size());
  for (const auto& [id, _] : shards_) out.push_back(id);
  return out;
}

}  // namespace aerialdb
