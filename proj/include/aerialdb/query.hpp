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

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aerialdb/geometry.hpp"
#include "aerialdb/model.hpp"
#include "aerialdb/types.hpp"

namespace aerialdb {

enum class Comparator { lt, le, eq, ge, gt };
enum class Combinator { all_of, any_of };  // AND / OR
enum class AggregateFn { count, min, max, mean, sum };

struct FieldPredicate {
  std::string field;
  Comparator op = Comparator::eq;
  double value = 0.0;

  bool test(double v) const noexcept;
  friend bool operator==(const FieldPredicate&, const FieldPredicate&) = default;
};

/// Per-shard aggregation. `field` is ignored for count.
struct Aggregation {
  AggregateFn fn = AggregateFn::count;
  std::string field;

  friend bool operator==(const Aggregation&, const Aggregation&) = default;
};

/// Client query. The spatial, temporal and shard-id filters are combined
/// with `combinator`; field predicates always apply conjunctively on top.
struct Query {
  std::optional<BoundingBox> bbox;
  std::optional<TimeRange> range;
  std::optional<std::string> shard_id;
  Combinator combinator = Combinator::all_of;
  std::vector<FieldPredicate> field_predicates;
  std::optional<Aggregation> aggregation;

  bool has_index_filter() const noexcept {
    return bbox.has_value() || range.has_value() || shard_id.has_value();
  }
  /// Throws Errc::broadcast_query when no index filter is present and
  /// Errc::invalid_argument for malformed predicates or an aggregation
  /// combined with OR.
  void validate() const;
  /// Whether a shard with this metadata may hold matching tuples.
  bool may_match(const ShardMeta& meta) const noexcept;

  friend bool operator==(const Query&, const Query&) = default;
};

/// Query scoped to an explicit set of shards on one edge.
struct SubQuery {
  std::optional<TimeRange> time;
  std::optional<BoundingBox> bbox;
  std::optional<std::string> shard_filter;
  Combinator combinator = Combinator::all_of;
  std::set<std::string> shard_ids;
  std::vector<FieldPredicate> field_predicates;
  std::optional<Aggregation> aggregation;

  static SubQuery from_query(const Query& q, std::set<std::string> shard_ids);
};

/// Result row: a tuple plus its ordinal inside its shard, which together
/// with the shard id identifies the tuple globally.
struct ResultRow {
  Tuple tuple;
  std::uint32_t ordinal = 0;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct AggregateRow {
  std::string shard_id;
  AggregateFn fn = AggregateFn::count;
  std::string field;
  double value = 0.0;
  std::size_t count = 0;

  friend bool operator==(const AggregateRow&, const AggregateRow&) = default;
};

struct SubQueryResult {
  std::vector<ResultRow> rows;
  std::vector<AggregateRow> aggregates;
  std::size_t tuples_scanned = 0;

  /// Sorts rows by (timestamp, shard id, ordinal) and aggregates by shard id.
  void canonicalize();
};

/// Row order used everywhere results are merged.
bool result_row_less(const ResultRow& a, const ResultRow& b) noexcept;

std::string_view to_string(Comparator c) noexcept;
std::string_view to_string(AggregateFn f) noexcept;
std::string_view to_string(Combinator c) noexcept;

}  // namespace aerialdb
