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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aerialdb/geometry.hpp"
#include "aerialdb/node.hpp"
#include "aerialdb/planner.hpp"
#include "aerialdb/transport.hpp"
#include "aerialdb/workload.hpp"

namespace aerialdb {

struct FailureEvent {
  /// Milliseconds after the start of the query phase.
  std::int64_t at_ms = 0;
  EdgeId edge{};
  friend bool operator==(const FailureEvent&, const FailureEvent&) = default;
};

/// Everything an experiment run depends on. Text form: one `key = value`
/// per line, `#` comments; see configs/ for the full key list.
struct ExperimentConfig {
  std::uint64_t seed = 42;
  std::size_t edge_count = 20;
  std::uint32_t drone_count = 100;
  double duration_hours = 48.0;
  PlannerKind planner = PlannerKind::min_shards;
  CoordinatorPolicy coordinator = CoordinatorPolicy::random();

  std::int64_t tau_seconds = 300;
  double sigma_degrees = 0.005;
  /// Defaults to the region's south-west corner.
  std::optional<GeoPoint> grid_origin;
  Timestamp epoch_origin = 1692057600000;  // 2023-08-15T00:00:00Z
  std::uint64_t hash_seed = 0;

  BoundingBox region{{13.08, 77.46}, {12.90, 77.69}};
  std::string sites_file;
  std::string road_graph_file;
  int road_rows = 40;
  int road_cols = 50;

  TransportConfig transport;
  NodeCostModel cost;
  EmitConfig emit;

  std::size_t query_count_per_cell = 200;
  std::vector<std::size_t> query_clients{1};
  std::size_t batch_size = kDefaultBatchSize;

  std::vector<FailureEvent> failure_schedule;
  std::vector<std::size_t> failure_counts{0, 1, 2, 3};
  std::size_t failure_trials = 10;

  std::int64_t duration_ms() const noexcept {
    return static_cast<std::int64_t>(duration_hours * 3'600'000.0);
  }
  GeoPoint effective_grid_origin() const noexcept {
    return grid_origin.value_or(GeoPoint{region.south(), region.west()});
  }

  /// Sets one key from its text value. Throws Errc::invalid_config.
  void set(std::string_view key, std::string_view value);
  /// Throws Errc::invalid_config.
  void validate() const;
  /// Every key with its current value, in a fixed order.
  std::vector<std::pair<std::string, std::string>> entries() const;
};

/// Applies `key = value` lines on top of `base`.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path);
/// Round-trippable text form (entries() joined as `key = value` lines).
std::string format_config(const ExperimentConfig& cfg);

}  // namespace aerialdb
