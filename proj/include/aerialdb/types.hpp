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
#include <set>
#include <string>
#include <vector>

namespace aerialdb {

/// Milliseconds since the Unix epoch.
using Timestamp = std::int64_t;

/// Edge identifiers are ordinal: the ascending order of ids defines the
/// index used by the modulo hashes and the successor sequence.
enum class EdgeId : std::uint32_t {};

constexpr std::uint32_t to_u32(EdgeId id) noexcept {
  return static_cast<std::uint32_t>(id);
}
constexpr EdgeId edge_id(std::uint32_t v) noexcept { return EdgeId{v}; }

using EdgeSet = std::set<EdgeId>;

std::string to_string(EdgeId id);

/// Closed time interval [start, end].
struct TimeRange {
  Timestamp start = 0;
  Timestamp end = 0;

  bool valid() const noexcept { return start <= end; }
  bool contains(Timestamp t) const noexcept { return start <= t && t <= end; }
  bool intersects(const TimeRange& o) const noexcept {
    return start <= o.end && o.start <= end;
  }
  Timestamp midpoint() const noexcept { return start + (end - start) / 2; }

  friend bool operator==(const TimeRange&, const TimeRange&) = default;
};

}  // namespace aerialdb
