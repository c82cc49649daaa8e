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

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "aerialdb/config.hpp"
#include "aerialdb/node.hpp"
#include "aerialdb/transport.hpp"
#include "aerialdb/workload.hpp"

namespace aerialdb {

struct InsertOutcome {
  InsertResponse response;
  EdgeId parent{};
  SimTime issued{0};
  SimTime latency{0};
  bool timed_out = false;
};

struct QueryOutcome {
  QueryResponse response;
  EdgeId coordinator{};
  SimTime issued{0};
  SimTime latency{0};
  bool timed_out = false;
};

/// A simulated deployment: transport, edge nodes, drone and query clients.
/// Virtual time zero corresponds to the configured epoch origin.
class Cluster {
 public:
  explicit Cluster(const ExperimentConfig& cfg);
  Cluster(const ExperimentConfig& cfg, std::vector<Site> sites);

  Cluster(const Cluster&) = delete;
  Cluster& operator=(const Cluster&) = delete;

  const ExperimentConfig& config() const noexcept { return cfg_; }
  Transport& transport() noexcept { return transport_; }
  const Deployment& deployment() const noexcept { return *deployment_; }
  const std::vector<std::unique_ptr<EdgeNode>>& nodes() const noexcept {
    return nodes_;
  }
  const EdgeNode& node(EdgeId id) const;
  const std::vector<EdgeId>& edge_ids() const noexcept {
    return deployment_->hash.edge_ids;
  }
  const RoadGraph& roads() const noexcept { return roads_; }
  const SensorModel& sensors() const noexcept { return sensors_; }

  SimTime to_sim(Timestamp t) const noexcept;
  Timestamp to_timestamp(SimTime t) const noexcept;

  /// Client `client` uploads `shard` at virtual time `at` to the edge
  /// whose cell contains `position`.
  void submit_insert(std::uint32_t client, SimTime at, ShardPayloadPtr shard,
                     GeoPoint position, std::function<void(InsertOutcome)> done);
  /// Client `client` picks a coordinator with `policy` and sends `q`.
  void submit_query(std::uint32_t client, SimTime at, Query q,
                    QueryOptions options, CoordinatorPolicy policy,
                    std::function<void(QueryOutcome)> done);

  /// Blocking variants: run the simulation until the reply arrives.
  InsertOutcome insert(const Shard& shard, std::optional<GeoPoint> position = {});
  QueryOutcome query(const Query& q, QueryOptions options = {},
                     CoordinatorPolicy policy = CoordinatorPolicy::random());

  void fail(EdgeId e) { transport_.fail(e); }
  void recover(EdgeId e) { transport_.recover(e); }
  /// Advances virtual time until every live edge agrees on membership.
  void settle();

 private:
  void attach_client(std::uint32_t client);

  ExperimentConfig cfg_;
  Transport transport_;
  std::shared_ptr<const Deployment> deployment_;
  std::vector<std::unique_ptr<EdgeNode>> nodes_;
  RoadGraph roads_;
  SensorModel sensors_;
  Rng coordinator_rng_;
  std::vector<bool> clients_;
};

/// Edge sites for `cfg`: the sites file when set, else a seeded lattice.
std::vector<Site> make_sites(const ExperimentConfig& cfg);
HashConfig make_hash_config(const ExperimentConfig& cfg,
                            const std::vector<Site>& sites);

}  // namespace aerialdb
