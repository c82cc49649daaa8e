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
#include <map>
#include <string>
#include <vector>

#include "aerialdb/model.hpp"
#include "aerialdb/query.hpp"

namespace aerialdb {

/// Identity of one stored tuple.
struct RowKey {
  Timestamp timestamp = 0;
  std::string shard_id;
  std::uint32_t ordinal = 0;
  friend auto operator<=>(const RowKey&, const RowKey&) = default;
};

/// Reference implementation of query semantics: keeps a private flat copy
/// of every tuple and answers queries by scanning all of them.
class Oracle {
 public:
  void add(const Shard& shard);

  /// Qualifying tuples, sorted. Aggregations are ignored.
  std::vector<RowKey> evaluate(const Query& q) const;

  std::size_t shard_count() const noexcept { return shards_.size(); }
  std::size_t tuple_count() const noexcept { return tuples_; }

 private:
  struct Row {
    Timestamp timestamp;
    double lat;
    double lon;
    std::uint32_t ordinal;
  };
  struct Entry {
    std::string shard_id;
    // Own bounds, computed from the rows.
    double south, north, west, east;
    Timestamp first, last;
    std::vector<Row> rows;
    std::vector<std::size_t> columns;  // global field ids
    std::vector<double> values;        // rows x columns, NaN if absent
  };
  bool row_matches(const Query& q, const Entry& e, std::size_t r) const;

  std::vector<std::string> field_names_;
  std::map<std::string, std::size_t, std::less<>> field_ids_;
  std::vector<Entry> shards_;
  std::size_t tuples_ = 0;
};

struct ResultScore {
  std::size_t expected = 0;
  std::size_t returned = 0;
  std::size_t matched = 0;
  std::size_t missing = 0;
  std::size_t extra = 0;
  std::size_t duplicates = 0;

  bool exact() const noexcept {
    return missing == 0 && extra == 0 && duplicates == 0;
  }
  /// matched / expected, or 1 when nothing was expected.
  double recall() const noexcept {
    return expected == 0 ? 1.0
                         : static_cast<double>(matched) /
                               static_cast<double>(expected);
  }
};

std::vector<RowKey> row_keys(const std::vector<ResultRow>& rows);
/// Compares returned keys (any order, duplicates counted) with the sorted
/// expected keys.
ResultScore score(std::vector<RowKey> returned,
                  const std::vector<RowKey>& expected);

}  // namespace aerialdb
