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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aerialdb/geometry.hpp"
#include "aerialdb/model.hpp"
#include "aerialdb/query.hpp"
#include "aerialdb/rng.hpp"

namespace aerialdb {

/// Street network: intersections and undirected street segments.
class RoadGraph {
 public:
  struct Street {
    std::uint32_t to = 0;
    double length_m = 0.0;
  };

  /// rows x cols lattice spanning `region` corner to corner, 4-connected.
  static RoadGraph grid(const BoundingBox& region, int rows, int cols);
  /// Parses `node <id> <lat> <lon>` and `edge <id> <id>` lines; `#` starts
  /// a comment. Throws Errc::parse_error.
  static RoadGraph parse(std::string_view text);
  static RoadGraph load(const std::string& path);

  std::uint32_t add_node(GeoPoint p);
  void add_street(std::uint32_t a, std::uint32_t b);

  /// Throws Errc::invalid_argument unless non-empty, connected and inside
  /// `region`.
  void validate(const BoundingBox& region) const;

  std::size_t node_count() const noexcept { return nodes_.size(); }
  GeoPoint node(std::uint32_t i) const { return nodes_.at(i); }
  const std::vector<Street>& streets(std::uint32_t i) const {
    return adj_.at(i);
  }

 private:
  std::vector<GeoPoint> nodes_;
  std::vector<std::vector<Street>> adj_;
};

struct WalkConfig {
  double min_speed_mps = 5.0;
  double max_speed_mps = 10.0;
  double hover_probability = 0.8;
  std::int64_t sample_period_ms = 5000;
};

/// Streams one drone's positions at the sampling ticks. At an intersection
/// the drone decides once per tick: hover with the configured probability,
/// otherwise drive a uniformly chosen street at its constant speed.
/// Reaching a dead end turns the drone around at once.
class DroneWalker {
 public:
  DroneWalker(const RoadGraph& graph, const WalkConfig& cfg, std::uint64_t seed);

  /// Position at the next tick (the first call returns the start position).
  GeoPoint next();
  double speed_mps() const noexcept { return speed_; }
  std::uint32_t start_node() const noexcept { return start_; }
  /// Streets completed so far and their total length.
  std::size_t legs() const noexcept { return legs_; }
  double distance_m() const noexcept { return distance_; }

 private:
  const RoadGraph* graph_;
  WalkConfig cfg_;
  Rng rng_;
  double speed_ = 0.0;
  std::uint32_t start_ = 0;
  std::uint32_t at_ = 0;
  bool moving_ = false;
  std::uint32_t to_ = 0;
  double depart_s_ = 0.0;
  double arrive_s_ = 0.0;
  double length_ = 0.0;
  std::int64_t tick_ = 0;
  std::size_t legs_ = 0;
  double distance_ = 0.0;
};

struct TracePoint {
  std::uint32_t drone_id = 0;
  Timestamp timestamp = 0;
  GeoPoint location;
};

/// Positions of `drone_count` drones at every sample tick of `duration_ms`
/// starting at `start`.
std::vector<TracePoint> random_walk(const RoadGraph& graph,
                                    std::uint32_t drone_count,
                                    std::int64_t duration_ms, Timestamp start,
                                    std::uint64_t seed,
                                    const WalkConfig& cfg = {});
/// CSV `drone_id,timestamp,lat,lon` with a header line.
std::string trace_csv(const std::vector<TracePoint>& trace);

/// Smooth seeded scalar fields over space and time.
class SensorModel {
 public:
  explicit SensorModel(std::uint64_t seed);
  static const std::vector<std::string>& field_names();
  std::map<std::string, double, std::less<>> sample(GeoPoint p,
                                                    Timestamp t) const;

 private:
  struct Wave {
    double k_lat, k_lon, omega, phase, amplitude;
  };
  struct Field {
    std::string name;
    double base;
    std::vector<Wave> waves;
  };
  std::vector<Field> fields_;
};

struct EmittedShard {
  std::uint32_t drone_id = 0;
  /// Time of the last sample; the drone uploads the shard then.
  Timestamp emit_time = 0;
  /// Drone position at upload, which selects the parent edge.
  GeoPoint position;
  Shard shard;
};

struct EmitConfig {
  WalkConfig walk;
  std::size_t samples_per_shard = 60;
};

/// One drone's shard stream: consecutive windows of samples_per_shard
/// samples, each carrying a UUID-formatted id.
class ShardEmitter {
 public:
  ShardEmitter(const RoadGraph& graph, const SensorModel& sensors,
               std::uint32_t drone_id, Timestamp start, std::uint64_t seed,
               const EmitConfig& cfg = {});
  EmittedShard next();
  std::int64_t shard_period_ms() const noexcept {
    return cfg_.walk.sample_period_ms *
           static_cast<std::int64_t>(cfg_.samples_per_shard);
  }

 private:
  const SensorModel* sensors_;
  EmitConfig cfg_;
  DroneWalker walker_;
  Rng id_rng_;
  std::uint32_t drone_id_;
  Timestamp start_;
  std::int64_t sample_ = 0;
};

std::string make_uuid(Rng& rng);

/// All shards of one drone over `duration_ms` (whole shard periods only).
std::vector<EmittedShard> emit_shards(const RoadGraph& graph,
                                      const SensorModel& sensors,
                                      std::uint32_t drone_id, Timestamp start,
                                      std::int64_t duration_ms,
                                      std::uint64_t seed,
                                      const EmitConfig& cfg = {});

struct GridQuery {
  Query query;
  int window_index = 0;  // 0: 5 min, 1: 30 min, 2: 2 h
  int side_index = 0;    // 0: 200 m, 1: 1 km, 2: 5 km
  std::string cell;      // e.g. "5min/200m"
};

inline constexpr std::int64_t kGridWindowsMs[3] = {5 * 60'000, 30 * 60'000,
                                                   120 * 60'000};
inline constexpr double kGridSidesM[3] = {200.0, 1000.0, 5000.0};
std::string grid_cell_name(int window_index, int side_index);

/// The nine window x side workload cells, `count_per_cell` queries each,
/// cell by cell (window-major). Query centres are uniform over the data
/// extent; every query is an AND of a bounding box and a time range.
std::vector<GridQuery> query_grid(std::uint64_t seed,
                                  std::size_t count_per_cell,
                                  const BoundingBox& extent,
                                  const TimeRange& time_extent);

/// `count` edge sites on a jittered lattice over `region`, ids 0..count-1.
std::vector<Site> lattice_sites(const BoundingBox& region, std::size_t count,
                                std::uint64_t seed, double jitter = 0.3);
/// Parses `<id> <lat> <lon>` lines. Throws Errc::parse_error.
std::vector<Site> parse_sites(std::string_view text);

}  // namespace aerialdb
