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

#include <array>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "aerialdb/geometry.hpp"
#include "aerialdb/types.hpp"

namespace aerialdb {

/// One spatio-temporal observation.
struct Tuple {
  Timestamp timestamp = 0;
  GeoPoint location;
  std::string shard_id;
  std::map<std::string, double, std::less<>> fields;

  friend bool operator==(const Tuple&, const Tuple&) = default;
};

/// Shard metadata: the unit of replication and indexing.
struct ShardMeta {
  std::string shard_id;
  BoundingBox bbox;
  TimeRange range;
};

/// A batch of tuples collected by one drone over one window.
struct Shard {
  std::string shard_id;
  BoundingBox bbox;
  TimeRange range;
  std::vector<Tuple> tuples;

  ShardMeta meta() const { return {shard_id, bbox, range}; }
  /// Sets bbox and range to the tight bounds of the tuples.
  void fit_bounds();
};

enum class ReplicaRole : std::size_t { spatial = 0, temporal = 1, id = 2 };

/// Index record: shard metadata plus where its three replicas live, in
/// (spatial, temporal, shardID) hash order.
struct ShardIndexEntry {
  std::string shard_id;
  BoundingBox bbox;
  TimeRange range;
  std::array<EdgeId, 3> replicas{};

  EdgeId replica(ReplicaRole role) const {
    return replicas[static_cast<std::size_t>(role)];
  }
  ShardMeta meta() const { return {shard_id, bbox, range}; }

  friend bool operator==(const ShardIndexEntry&, const ShardIndexEntry&) =
      default;
};

/// Immutable columnar form of a validated shard. Rows are sorted by
/// timestamp (stable with respect to the original tuple order), and the
/// ordinal of a row is its position in the original tuple list.
class ShardPayload {
 public:
  /// Validates tuple invariants and builds the columnar form. Throws
  /// Errc::invalid_shard if any tuple falls outside the shard's bounds, has a
  /// mismatching shard id or carries a NaN value.
  static std::shared_ptr<const ShardPayload> from_shard(const Shard& shard);

  const std::string& shard_id() const noexcept { return shard_id_; }
  const BoundingBox& bbox() const noexcept { return bbox_; }
  const TimeRange& range() const noexcept { return range_; }
  ShardMeta meta() const { return {shard_id_, bbox_, range_}; }

  std::size_t size() const noexcept { return timestamps_.size(); }
  const std::vector<std::string>& field_names() const noexcept {
    return field_names_;
  }
  Timestamp timestamp(std::size_t row) const { return timestamps_[row]; }
  GeoPoint location(std::size_t row) const { return {lats_[row], lons_[row]}; }
  std::uint32_t ordinal(std::size_t row) const { return ordinals_[row]; }
  /// Field value or NaN when the tuple has no such field.
  double value(std::size_t row, std::size_t field) const {
    return values_[row * field_names_.size() + field];
  }
  /// Column index of a field, or npos.
  std::size_t field_index(std::string_view name) const noexcept;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  Tuple tuple(std::size_t row) const;
  std::vector<Tuple> tuples_in_original_order() const;

  /// Size of the ingest-format encoding of the payload.
  std::size_t wire_bytes() const noexcept { return wire_bytes_; }

 private:
  std::string shard_id_;
  BoundingBox bbox_;
  TimeRange range_;
  std::vector<std::string> field_names_;
  std::vector<Timestamp> timestamps_;
  std::vector<double> lats_;
  std::vector<double> lons_;
  std::vector<std::uint32_t> ordinals_;
  std::vector<double> values_;
  std::size_t wire_bytes_ = 0;
};

using ShardPayloadPtr = std::shared_ptr<const ShardPayload>;

/// Line-delimited ingest format, one record per tuple:
/// `timestamp,lat,lon,field=value[,field=value...]`. Doubles use the shortest
/// representation that round-trips exactly; fields appear in name order.
std::string encode_tuples(const std::vector<Tuple>& tuples);
std::string encode_tuple(const Tuple& t);
/// Inverse of encode_tuples; each tuple gets `shard_id`. Throws
/// Errc::parse_error on malformed input.
std::vector<Tuple> decode_tuples(std::string_view text,
                                 std::string_view shard_id);

}  // namespace aerialdb
