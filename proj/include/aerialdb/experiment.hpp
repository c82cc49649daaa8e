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
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "aerialdb/cluster.hpp"
#include "aerialdb/config.hpp"
#include "aerialdb/oracle.hpp"

namespace aerialdb {

struct InsertRecord {
  std::size_t index = 0;
  std::uint32_t drone_id = 0;
  std::string shard_id;
  InsertOutcome outcome;
};

/// A cluster after the insertion workload has run.
struct LoadedCluster {
  std::unique_ptr<Cluster> cluster;
  /// Filled only when requested.
  Oracle oracle;
  std::map<std::string, std::array<EdgeId, 3>> placements;
  std::vector<InsertRecord> inserts;
  std::size_t failed_inserts = 0;
  BoundingBox extent;
  TimeRange time_extent;
};

struct LoadOptions {
  bool build_oracle = true;
  bool keep_records = false;
};

/// Drives every drone's shard stream through the cluster in virtual time.
LoadedCluster load_cluster(const ExperimentConfig& cfg, LoadOptions opts = {});

using QueryObserver = std::function<void(std::size_t index, QueryOutcome&)>;

/// Issues `queries` from `clients` closed-loop clients (client k sends
/// queries k, k + clients, ... one after another) starting at `start`, and
/// runs the simulation until all have been answered.
void run_queries(Cluster& cluster, const std::vector<GridQuery>& queries,
                 const QueryOptions& options, const CoordinatorPolicy& policy,
                 std::size_t clients, SimTime start,
                 const QueryObserver& observe);

/// The query grid over the loaded data's extent.
std::vector<GridQuery> workload_queries(const ExperimentConfig& cfg,
                                        const LoadedCluster& loaded);

struct EdgeLoad {
  EdgeId edge{};
  ReplicaCounts replicas;
  std::size_t index_entries = 0;
  std::size_t tuples = 0;
};

struct LoadBalance {
  std::vector<EdgeLoad> edges;
  std::size_t min_total = 0;
  std::size_t max_total = 0;
  /// max / min over per-edge replica totals.
  double ratio = 0.0;
  /// Fraction of all placements contributed by each hash dimension.
  std::array<double, 3> dimension_share{};
  /// max / min of per-edge counts within each dimension.
  std::array<double, 3> dimension_ratio{};
  /// Extremes over edges of each edge's per-dimension share of its replicas.
  double min_edge_share = 0.0;
  double max_edge_share = 0.0;
};

LoadBalance load_balance(const Cluster& cluster);

/// Oracle rows minus those of shards whose replicas all lie in `failed`.
std::vector<RowKey> surviving_rows(
    const std::vector<RowKey>& expected,
    const std::map<std::string, std::array<EdgeId, 3>>& placements,
    const EdgeSet& failed);

struct RunResult {
  int exit_code = 0;
  std::vector<std::filesystem::path> files;
  std::string summary;
};

RunResult run_insert(const ExperimentConfig& cfg,
                     const std::filesystem::path& out_dir);
RunResult run_query(const ExperimentConfig& cfg,
                    const std::filesystem::path& out_dir);
RunResult run_failure(const ExperimentConfig& cfg,
                      const std::filesystem::path& out_dir);

/// Fixed-point rendering used in every CSV.
std::string fixed(double v, int decimals);

}  // namespace aerialdb
