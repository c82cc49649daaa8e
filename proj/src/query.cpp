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

#include "aerialdb/query.hpp"

#include <algorithm>
#include <tuple>

#include "aerialdb/errors.hpp"

namespace aerialdb {

bool FieldPredicate::test(double v) const noexcept {
  switch (op) {
    case Comparator::lt: return v < value;
    case Comparator::le: return v <= value;
    case Comparator::eq: return v == value;
    case Comparator::ge: return v >= value;
    case Comparator::gt: return v > value;
  }
  return false;
}

void Query::validate() const {
  if (!has_index_filter())
    throw Error(Errc::broadcast_query,
                "query needs a spatial, temporal or shard id filter");
  if (bbox && !bbox->valid())
    throw Error(Errc::invalid_argument, "query bounding box is invalid");
  if (range && !range->valid())
    throw Error(Errc::invalid_argument, "query time range is invalid");
  if (aggregation && combinator == Combinator::any_of)
    throw Error(Errc::invalid_argument,
                "aggregation is only supported with AND-combined filters");
  if (aggregation && aggregation->fn != AggregateFn::count &&
      aggregation->field.empty())
    throw Error(Errc::invalid_argument, "aggregation needs a field");
}

bool Query::may_match(const ShardMeta& meta) const noexcept {
  const bool s = bbox && bbox_intersects(*bbox, meta.bbox);
  const bool t = range && range->intersects(meta.range);
  const bool i = shard_id && *shard_id == meta.shard_id;
  if (combinator == Combinator::any_of) return s || t || i;
  return (!bbox || s) && (!range || t) && (!shard_id || i);
}

SubQuery SubQuery::from_query(const Query& q, std::set<std::string> shard_ids) {
  SubQuery sq;
  sq.time = q.range;
  sq.bbox = q.bbox;
  sq.shard_filter = q.shard_id;
  sq.combinator = q.combinator;
  sq.shard_ids = std::move(shard_ids);
  sq.field_predicates = q.field_predicates;
  sq.aggregation = q.aggregation;
  return sq;
}

bool result_row_less(const ResultRow& a, const ResultRow& b) noexcept {
  return std::tie(a.tuple.timestamp, a.tuple.shard_id, a.ordinal) <
         std::tie(b.tuple.timestamp, b.tuple.shard_id, b.ordinal);
}

void SubQueryResult::canonicalize() {
  std::sort(rows.begin(), rows.end(), result_row_less);
  std::sort(aggregates.begin(), aggregates.end(),
            [](const AggregateRow& a, const AggregateRow& b) {
              return a.shard_id < b.shard_id;
            });
}

std::string_view to_string(Comparator c) noexcept {
  switch (c) {
    case Comparator::lt: return "<";
    case Comparator::le: return "<=";
    case Comparator::eq: return "=";
    case Comparator::ge: return ">=";
    case Comparator::gt: return ">";
  }
  return "?";
}

std::string_view to_string(AggregateFn f) noexcept {
  switch (f) {
    case AggregateFn::count: return "count";
    case AggregateFn::min: return "min";
    case AggregateFn::max: return "max";
    case AggregateFn::mean: return "mean";
    case AggregateFn::sum: return "sum";
  }
  return "?";
}

std::string_view to_string(Combinator c) noexcept {
  return c == Combinator::all_of ? "AND" : "OR";
}

}  // namespace aerialdb
