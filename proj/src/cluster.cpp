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

#include "aerialdb/cluster.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "aerialdb/errors.hpp"

namespace aerialdb {

namespace {

TransportConfig transport_config(const ExperimentConfig& cfg) {
  TransportConfig t = cfg.transport;
  t.latency.jitter_seed = derive_seed(cfg.seed, "link-jitter");
  return t;
}

RoadGraph make_roads(const ExperimentConfig& cfg) {
  RoadGraph g = cfg.road_graph_file.empty()
                    ? RoadGraph::grid(cfg.region, cfg.road_rows, cfg.road_cols)
                    : RoadGraph::load(cfg.road_graph_file);
  g.validate(cfg.region);
  return g;
}

}  // namespace

std::vector<Site> make_sites(const ExperimentConfig& cfg) {
  if (cfg.sites_file.empty()) {
    return lattice_sites(cfg.region, cfg.edge_count,
                         derive_seed(cfg.seed, "sites"));
  }
  std::ifstream in(cfg.sites_file);
  if (!in) throw Error(Errc::invalid_config, "cannot open " + cfg.sites_file);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_sites(ss.str());
}

HashConfig make_hash_config(const ExperimentConfig& cfg,
                            const std::vector<Site>& sites) {
  HashConfig h;
  h.tau_seconds = cfg.tau_seconds;
  h.sigma_degrees = cfg.sigma_degrees;
  h.grid_origin = cfg.effective_grid_origin();
  h.epoch_origin = cfg.epoch_origin;
  h.hash_seed = cfg.hash_seed;
  for (const auto& s : sites) h.edge_ids.push_back(s.id);
  std::sort(h.edge_ids.begin(), h.edge_ids.end());
  h.validate();
  return h;
}

Cluster::Cluster(const ExperimentConfig& cfg) : Cluster(cfg, make_sites(cfg)) {}

Cluster::Cluster(const ExperimentConfig& cfg, std::vector<Site> sites)
    : cfg_(cfg),
      transport_(transport_config(cfg)),
      roads_(make_roads(cfg)),
      sensors_(cfg.seed),
      coordinator_rng_(derive_seed(cfg.seed, "coordinator")) {
  cfg_.validate();
  if (sites.size() < 3) {
    throw Error(Errc::invalid_config, "a deployment needs at least 3 edges");
  }
  auto dep = std::make_shared<Deployment>(Deployment{
      make_hash_config(cfg_, sites), build_voronoi(sites, cfg_.region),
      cfg_.cost, cfg_.seed});
  deployment_ = dep;
  for (EdgeId e : deployment_->hash.edge_ids) {
    nodes_.push_back(std::make_unique<EdgeNode>(e, transport_, deployment_));
  }
  for (const auto& f : cfg_.failure_schedule) {
    if (!std::binary_search(edge_ids().begin(), edge_ids().end(), f.edge)) {
      throw Error(Errc::invalid_config,
                  "failure.schedule names unknown edge " + to_string(f.edge));
    }
  }
}

const EdgeNode& Cluster::node(EdgeId id) const {
  auto it = std::lower_bound(edge_ids().begin(), edge_ids().end(), id);
  if (it == edge_ids().end() || *it != id) {
    throw Error(Errc::invalid_argument, "unknown edge " + to_string(id));
  }
  return *nodes_[static_cast<std::size_t>(it - edge_ids().begin())];
}

SimTime Cluster::to_sim(Timestamp t) const noexcept {
  return std::chrono::milliseconds(t - cfg_.epoch_origin);
}

Timestamp Cluster::to_timestamp(SimTime t) const noexcept {
  return cfg_.epoch_origin +
         std::chrono::duration_cast<std::chrono::milliseconds>(t).count();
}

void Cluster::attach_client(std::uint32_t client) {
  if (client >= clients_.size()) clients_.resize(client + 1, false);
  if (clients_[client]) return;
  clients_[client] = true;
  transport_.attach(Address::client(client), [](Message&&, const Responder&) {});
}

void Cluster::submit_insert(std::uint32_t client, SimTime at,
                            ShardPayloadPtr shard, GeoPoint position,
                            std::function<void(InsertOutcome)> done) {
  attach_client(client);
  const EdgeId parent = deployment_->partition.locate(position);
  transport_.schedule(
      Address::client(client), at,
      [this, client, parent, shard = std::move(shard), done = std::move(done)] {
        Message m;
        m.kind = MessageKind::insert_request;
        m.source = Address::client(client);
        m.destination = Address::edge(parent);
        m.payload = InsertRequest{shard};
        const SimTime issued = transport_.now();
        transport_.send(std::move(m), [this, parent, issued,
                                       done](Delivery&& d) {
          InsertOutcome out;
          out.parent = parent;
          out.issued = issued;
          out.latency = transport_.now() - issued;
          if (auto* r = std::get_if<InsertResponse>(&d.reply.payload)) {
            out.response = std::move(*r);
          } else {
            out.timed_out = true;
            out.response.error = "timeout: parent edge unreachable";
          }
          done(std::move(out));
        });
      });
}

void Cluster::submit_query(std::uint32_t client, SimTime at, Query q,
                           QueryOptions options, CoordinatorPolicy policy,
                           std::function<void(QueryOutcome)> done) {
  attach_client(client);
  transport_.schedule(
      Address::client(client), at,
      [this, client, q = std::move(q), options, policy,
       done = std::move(done)]() mutable {
        const EdgeSet up = transport_.up_edges();
        QueryOutcome out;
        out.issued = transport_.now();
        if (up.empty()) {
          out.response.error = "no live edge";
          done(std::move(out));
          return;
        }
        out.coordinator =
            select_coordinator(q, policy, deployment_->hash,
                               deployment_->partition, up, coordinator_rng_);
        options.local_threshold =
            policy.locality_aware ? policy.local_threshold : 0;
        Message m;
        m.kind = MessageKind::query_request;
        m.source = Address::client(client);
        m.destination = Address::edge(out.coordinator);
        m.payload = QueryRequest{std::move(q), options};
        transport_.send(std::move(m), [this, out, done](Delivery&& d) mutable {
          out.latency = transport_.now() - out.issued;
          if (auto* r = std::get_if<QueryResponse>(&d.reply.payload)) {
            out.response = std::move(*r);
          } else {
            out.timed_out = true;
            out.response.error = "timeout: coordinator unreachable";
          }
          done(std::move(out));
        });
      });
}

InsertOutcome Cluster::insert(const Shard& shard,
                              std::optional<GeoPoint> position) {
  auto payload = ShardPayload::from_shard(shard);
  const GeoPoint where = position.value_or(bbox_midpoint(payload->bbox()));
  std::optional<InsertOutcome> result;
  submit_insert(0, transport_.now(), payload, where,
                [&result](InsertOutcome o) { result = std::move(o); });
  while (!result && !transport_.idle()) {
    transport_.run_until(transport_.now() + std::chrono::milliseconds(1));
  }
  if (!result) throw Error(Errc::invalid_argument, "insert never completed");
  return std::move(*result);
}

QueryOutcome Cluster::query(const Query& q, QueryOptions options,
                            CoordinatorPolicy policy) {
  std::optional<QueryOutcome> result;
  submit_query(0, transport_.now(), q, options, policy,
               [&result](QueryOutcome o) { result = std::move(o); });
  while (!result && !transport_.idle()) {
    transport_.run_until(transport_.now() + std::chrono::milliseconds(1));
  }
  if (!result) throw Error(Errc::invalid_argument, "query never completed");
  return std::move(*result);
}

void Cluster::settle() {
  const auto& hb = cfg_.transport.heartbeat;
  transport_.run_until(transport_.now() + hb.interval * (hb.misses + 1) +
                       from_ms(cfg_.transport.latency.edge_edge_ms) +
                       cfg_.transport.timeout);
}

}  // namespace aerialdb
