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

#include <cstddef>
#include <map>
#include <shared_mutex>
#include <string>

#include "aerialdb/model.hpp"
#include "aerialdb/query.hpp"

namespace aerialdb {

/// Shard-ID groups per sub-query batch.
inline constexpr std::size_t kDefaultBatchSize = 150;

/// Per-edge time-series store. Tuples are held shard-major (one immutable
/// columnar payload per shard id, rows time-sorted), since every sub-query
/// is scoped to an explicit set of shard ids.
class Store {
 public:
  /// Validates and stores a shard; replaces any shard with the same id.
  /// Throws Errc::invalid_shard and leaves the store unchanged on failure.
  void insert_shard(const Shard& shard);
  void insert_payload(ShardPayloadPtr payload);

  /// Tuples of the scoped shards that satisfy every filter, in (timestamp,
  /// shard id, ordinal) order; or one aggregate row per shard with matches.
  SubQueryResult execute(const SubQuery& sq) const;
  /// Same result as execute(), evaluated as independent groups of at most
  /// `batch_size` shard ids.
  SubQueryResult batch_execute(const SubQuery& sq,
                               std::size_t batch_size = kDefaultBatchSize) const;

  static std::size_t batch_count(std::size_t shard_ids, std::size_t batch_size);

  bool contains(const std::string& shard_id) const;
  ShardPayloadPtr shard(const std::string& shard_id) const;
  std::size_t shard_count() const;
  std::size_t tuple_count() const;
  std::vector<std::string> shard_ids() const;

 private:
  SubQueryResult execute_unlocked(const SubQuery& sq) const;

  mutable std::shared_mutex mu_;
  std::map<std::string, ShardPayloadPtr, std::less<>> shards_;
  std::size_t tuples_ = 0;
};

}  // namespace aerialdb
