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

#include "aerialdb/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "aerialdb/errors.hpp"
#include "aerialdb/experiment.hpp"
#include "aerialdb/store.hpp"

namespace aerialdb {

bool VerifyReport::passed() const noexcept {
  return std::all_of(results.begin(), results.end(), [](const PropertyResult& r) {
    return r.passed || r.informational;
  });
}

std::string VerifyReport::text() const {
  std::string out;
  for (const auto& r : results) {
    out += r.informational ? "INFO" : (r.passed ? "PASS" : "FAIL");
    out += " " + r.name + " (seed " + std::to_string(r.seed) + "): " + r.detail +
           "\n";
  }
  return out;
}

std::optional<std::string> check_coverage(const ReplicaMap& shards,
                                          const EdgeSet& live,
                                          const PlanAssignment& plan) {
  std::set<std::string> seen;
  for (const auto& [edge, ids] : plan.assignment) {
    if (!live.count(edge)) return "dead edge " + to_string(edge) + " assigned";
    for (const auto& id : ids) {
      auto it = shards.find(id);
      if (it == shards.end()) return "unknown shard " + id + " assigned";
      if (std::find(it->second.begin(), it->second.end(), edge) ==
          it->second.end()) {
        return "shard " + id + " assigned to non-holder " + to_string(edge);
      }
      if (!seen.insert(id).second) return "shard " + id + " assigned twice";
    }
  }
  const std::set<std::string> unreachable(plan.unreachable.begin(),
                                          plan.unreachable.end());
  for (const auto& [id, holders] : shards) {
    const bool any_live = std::any_of(holders.begin(), holders.end(),
                                      [&](EdgeId e) { return live.count(e) != 0; });
    if (any_live && !seen.count(id)) return "shard " + id + " not covered";
    if (!any_live && !unreachable.count(id)) {
      return "shard " + id + " has no live replica but is not unreachable";
    }
    if (any_live && unreachable.count(id)) {
      return "shard " + id + " wrongly reported unreachable";
    }
  }
  return std::nullopt;
}

ReplicaMap random_replica_map(Rng& rng, const std::vector<EdgeId>& edges,
                              std::size_t shard_count, bool degrade,
                              EdgeSet& live) {
  ReplicaMap out;
  std::vector<EdgeId> pool = edges;
  for (std::size_t i = 0; i < shard_count; ++i) {
    for (std::size_t k = 0; k < 3; ++k) {
      std::swap(pool[k], pool[k + uniform_index(rng, pool.size() - k)]);
    }
    char id[16];
    std::snprintf(id, sizeof id, "s-%05zu", i);
    out.emplace(id, std::vector<EdgeId>(pool.begin(), pool.begin() + 3));
  }
  live = EdgeSet(edges.begin(), edges.end());
  if (degrade) {
    const std::size_t dead = 1 + uniform_index(rng, 2);
    for (std::size_t k = 0; k < dead; ++k) {
      std::swap(pool[k], pool[k + uniform_index(rng, pool.size() - k)]);
      live.erase(pool[k]);
    }
  }
  return out;
}

std::vector<std::pair<std::string, PlannerFn>> standard_planners(
    bool inject_duplicate) {
  std::vector<std::pair<std::string, PlannerFn>> out = {
      {"random", [](const ReplicaMap& m, const EdgeSet& l, Rng& r) {
         return plan_random(m, l, r);
       }},
      {"minshards", [](const ReplicaMap& m, const EdgeSet& l, Rng&) {
         return plan_min_shards(m, l);
       }},
      {"minedges", [](const ReplicaMap& m, const EdgeSet& l, Rng&) {
         return plan_min_edges(m, l);
       }},
  };
  if (inject_duplicate) {
    for (auto& [name, fn] : out) {
      fn = [inner = fn](const ReplicaMap& m, const EdgeSet& l, Rng& r) {
        PlanAssignment p = inner(m, l, r);
        // Also send the first shard to a second live holder.
        for (const auto& [id, holders] : m) {
          for (EdgeId e : holders) {
            if (!l.count(e)) continue;
            auto it = p.assignment.find(e);
            if (it == p.assignment.end() || !it->second.count(id)) {
              p.assignment[e].insert(id);
              return p;
            }
          }
        }
        return p;
      };
    }
  }
  return out;
}

PropertyResult verify_plan_coverage(
    std::uint64_t seed, std::size_t maps,
    const std::vector<std::pair<std::string, PlannerFn>>& planners) {
  PropertyResult res{"plan coverage", true, false, "", seed};
  Rng rng(derive_seed(seed, "coverage"));
  std::size_t plans = 0;
  for (std::size_t m = 0; m < maps; ++m) {
    const std::size_t edge_count = 4 + uniform_index(rng, 17);
    std::vector<EdgeId> edges;
    for (std::size_t e = 0; e < edge_count; ++e) {
      edges.push_back(edge_id(static_cast<std::uint32_t>(e)));
    }
    EdgeSet live;
    const ReplicaMap shards = random_replica_map(
        rng, edges, 1 + uniform_index(rng, 200), m % 2 == 1, live);
    for (const auto& [name, planner] : planners) {
      Rng prng(derive_seed(seed, "coverage-planner", m));
      const PlanAssignment plan = planner(shards, live, prng);
      ++plans;
      if (auto err = check_coverage(shards, live, plan)) {
        res.passed = false;
        res.detail = name + " on map " + std::to_string(m) + ": " + *err;
        return res;
      }
    }
  }
  res.detail = std::to_string(plans) + " plans over " + std::to_string(maps) +
               " maps cover every shard exactly once";
  return res;
}

PropertyResult verify_min_shards_dominance(std::uint64_t seed,
                                           std::size_t maps) {
  PropertyResult res{"minshards max <= minedges max (random maps)", true, false,
                     "", seed};
  Rng rng(derive_seed(seed, "dominance"));
  std::size_t mean_worse = 0;
  for (std::size_t m = 0; m < maps; ++m) {
    std::vector<EdgeId> edges;
    const std::size_t edge_count = 4 + uniform_index(rng, 17);
    for (std::size_t e = 0; e < edge_count; ++e) {
      edges.push_back(edge_id(static_cast<std::uint32_t>(e)));
    }
    EdgeSet live;
    const ReplicaMap shards = random_replica_map(
        rng, edges, 1 + uniform_index(rng, 200), m % 2 == 1, live);
    const auto a = plan_min_shards(shards, live);
    const auto b = plan_min_edges(shards, live);
    if (a.max_shards_per_edge() > b.max_shards_per_edge()) {
      res.passed = false;
      res.detail = "map " + std::to_string(m) + ": max " +
                   std::to_string(a.max_shards_per_edge()) + " > " +
                   std::to_string(b.max_shards_per_edge());
      return res;
    }
    if (a.mean_shards_per_edge() > b.mean_shards_per_edge() + 1e-12) ++mean_worse;
  }
  res.detail = std::to_string(maps) + " maps; mean larger on " +
               std::to_string(mean_worse);
  return res;
}

PropertyResult verify_algorithm_fixture() {
  PropertyResult res{"planner fixture", true, false, "", 0};
  const EdgeId a = edge_id(0), b = edge_id(1), c = edge_id(2);
  const ReplicaMap shards = {{"s1", {a}}, {"s2", {a, b}}, {"s3", {b, c}}};
  const EdgeSet live{a, b, c};
  const auto ms = plan_min_shards(shards, live);
  const auto me = plan_min_edges(shards, live);
  const std::map<EdgeId, std::set<std::string>> want_ms = {
      {a, {"s1"}}, {b, {"s2"}}, {c, {"s3"}}};
  const std::map<EdgeId, std::set<std::string>> want_me = {{a, {"s1", "s2"}},
                                                           {b, {"s3"}}};
  res.passed = ms.assignment == want_ms && me.assignment == want_me;
  res.detail = res.passed ? "MinShards {A:s1, B:s2, C:s3}; MinEdges {A:s1 s2, B:s3}"
                          : "plans differ from the hand trace";
  return res;
}

namespace {

double snap(double v, double origin, double pitch) {
  return origin + std::round((v - origin) / pitch) * pitch;
}

}  // namespace

PropertyResult verify_slice_agreement(std::uint64_t seed, std::size_t pairs,
                                      const HashConfig& cfg,
                                      const VoronoiPartition& partition,
                                      const SpatialQueryFn& query_side) {
  PropertyResult res{"slice agreement", true, false, "", seed};
  Rng rng(derive_seed(seed, "slices"));
  const BoundingBox& region = partition.region();
  const double h = region.north() - region.south();
  const double w = region.east() - region.west();
  const Timestamp t0 = cfg.epoch_origin;
  const std::int64_t span = 48LL * 3'600'000;

  auto coord = [&](double lo, double extent, double origin, bool snapped) {
    double v = lo + uniform01(rng) * extent;
    if (snapped) v = snap(v, origin, cfg.sigma_degrees);
    return std::clamp(v, lo, lo + extent);
  };

  for (std::size_t i = 0; i < pairs; ++i) {
    const bool snapped = uniform01(rng) < 0.2;
    // Shard metadata inside the region.
    double s1 = coord(region.south(), h, cfg.grid_origin.lat, snapped);
    double s2 = uniform01(rng) < 0.1
                    ? s1
                    : std::clamp(s1 + std::pow(uniform01(rng), 2) * 0.03,
                                 region.south(), region.north());
    double w1 = coord(region.west(), w, cfg.grid_origin.lon, snapped);
    double w2 = uniform01(rng) < 0.1
                    ? w1
                    : std::clamp(w1 + std::pow(uniform01(rng), 2) * 0.03,
                                 region.west(), region.east());
    const auto shard_box = BoundingBox::from_bounds(s1, w1, s2, w2);
    Timestamp ts = t0 + static_cast<Timestamp>(uniform01(rng) * span);
    if (snapped) ts -= (ts - t0) % cfg.tau_ms();
    const Timestamp te =
        ts + (uniform01(rng) < 0.1
                  ? 0
                  : static_cast<Timestamp>(std::pow(uniform01(rng), 2) * 7.2e6));
    ShardIndexEntry entry{"pair-" + std::to_string(i), shard_box, {ts, te}, {}};

    // A query that touches the shard's box and range.
    const GeoPoint p{s1 + uniform01(rng) * (s2 - s1),
                     w1 + uniform01(rng) * (w2 - w1)};
    auto ext = [&] {
      return uniform01(rng) < 0.2 ? 0.0 : std::pow(uniform01(rng), 2) * 0.05;
    };
    auto qbox = BoundingBox::from_bounds(p.lat - ext(), p.lon - ext(),
                                         p.lat + ext(), p.lon + ext());
    if (uniform01(rng) < 0.2) {
      // Query edge on a grid line.
      qbox = BoundingBox::from_bounds(
          std::min(p.lat, snap(qbox.south(), cfg.grid_origin.lat, cfg.sigma_degrees)),
          qbox.west(), qbox.north(), qbox.east());
    }
    const Timestamp tp = ts + static_cast<Timestamp>(uniform01(rng) * (te - ts));
    const TimeRange qrange{
        tp - static_cast<Timestamp>(uniform01(rng) * 1.08e7),
        tp + static_cast<Timestamp>(uniform01(rng) * 1.08e7)};

    const IndexTargets targets = index_edges_for(entry, cfg, partition);
    const EdgeSet qs = query_side(qbox, cfg, partition);
    const EdgeSet qt = temporal_query_edges(qrange, cfg);
    auto meets = [](const EdgeSet& a, const EdgeSet& b) {
      return std::any_of(a.begin(), a.end(), [&](EdgeId e) { return b.count(e); });
    };
    if (!meets(targets.spatial, qs) || !meets(targets.temporal, qt)) {
      res.passed = false;
      res.detail = "pair " + std::to_string(i) + ": " +
                   (meets(targets.spatial, qs) ? "temporal" : "spatial") +
                   " slice sets are disjoint";
      return res;
    }
  }
  res.detail = std::to_string(pairs) + " intersecting pairs share index edges";
  return res;
}

EdgeSet misanchored_spatial_query_edges(const BoundingBox& b,
                                        const HashConfig& cfg,
                                        const VoronoiPartition& partition) {
  HashConfig local = cfg;
  local.grid_origin = {b.south(), b.west()};
  return spatial_query_edges(b, local, partition);
}

PropertyResult verify_batch_equivalence(std::uint64_t seed,
                                        const std::vector<std::size_t>& sizes) {
  PropertyResult res{"batch equivalence", true, false, "", seed};
  Rng rng(derive_seed(seed, "batches"));
  const std::size_t shard_count =
      sizes.empty() ? 0 : *std::max_element(sizes.begin(), sizes.end());
  Store store;
  std::vector<std::string> ids;
  const Timestamp t0 = 1'000'000;
  for (std::size_t i = 0; i < shard_count; ++i) {
    Shard s;
    s.shard_id = "b-" + std::to_string(i);
    const std::size_t n = 1 + uniform_index(rng, 12);
    for (std::size_t k = 0; k < n; ++k) {
      Tuple t;
      t.shard_id = s.shard_id;
      t.timestamp = t0 + static_cast<Timestamp>(uniform_index(rng, 100'000));
      t.location = {12.9 + 0.1 * uniform01(rng), 77.5 + 0.1 * uniform01(rng)};
      t.fields["pm25"] = 100.0 * uniform01(rng);
      if (uniform01(rng) < 0.7) t.fields["humidity"] = 100.0 * uniform01(rng);
      s.tuples.push_back(std::move(t));
    }
    s.fit_bounds();
    store.insert_shard(s);
    ids.push_back(s.shard_id);
  }
  std::size_t checks = 0;
  for (std::size_t n : sizes) {
    for (int trial = 0; trial < 6; ++trial) {
      std::vector<std::string> pick = ids;
      for (std::size_t k = 0; k < n; ++k) {
        std::swap(pick[k], pick[k + uniform_index(rng, pick.size() - k)]);
      }
      SubQuery sq;
      sq.shard_ids = std::set<std::string>(pick.begin(), pick.begin() + n);
      const Timestamp a = t0 + static_cast<Timestamp>(uniform_index(rng, 100'000));
      sq.time = TimeRange{a, a + static_cast<Timestamp>(uniform_index(rng, 60'000))};
      const double lat = 12.9 + 0.1 * uniform01(rng);
      const double lon = 77.5 + 0.1 * uniform01(rng);
      sq.bbox = BoundingBox::from_bounds(lat - 0.04, lon - 0.04, lat + 0.04, lon + 0.04);
      sq.combinator = trial % 3 == 2 ? Combinator::any_of : Combinator::all_of;
      if (trial % 2 == 1) sq.field_predicates.push_back({"humidity", Comparator::ge, 30.0});
      if (trial == 4) sq.aggregation = Aggregation{AggregateFn::mean, "pm25"};
      const SubQueryResult whole = store.execute(sq);
      const SubQueryResult batched = store.batch_execute(sq, kDefaultBatchSize);
      ++checks;
      if (whole.rows != batched.rows || whole.aggregates != batched.aggregates) {
        res.passed = false;
        res.detail = "size " + std::to_string(n) + " trial " +
                     std::to_string(trial) + " differs";
        return res;
      }
    }
  }
  res.detail = std::to_string(checks) + " batched sub-queries equal unbatched";
  return res;
}

PropertyResult verify_replica_placement(std::uint64_t seed, std::size_t metas,
                                        const HashConfig& cfg,
                                        const VoronoiPartition& partition) {
  PropertyResult res{"replica placement", true, false, "", seed};
  Rng rng(derive_seed(seed, "placement"));
  const BoundingBox& region = partition.region();
  for (std::size_t i = 0; i < metas; ++i) {
    EdgeSet live(cfg.edge_ids.begin(), cfg.edge_ids.end());
    const std::size_t dead =
        uniform_index(rng, std::min<std::size_t>(4, cfg.edge_ids.size() - 2));
    for (std::size_t k = 0; k < dead; ++k) {
      live.erase(cfg.edge_ids[uniform_index(rng, cfg.edge_ids.size())]);
    }
    if (live.size() < 3) continue;
    const double lat = region.south() + uniform01(rng) * (region.north() - region.south());
    const double lon = region.west() + uniform01(rng) * (region.east() - region.west());
    const Timestamp t =
        cfg.epoch_origin + static_cast<Timestamp>(uniform_index(rng, 172'800'000));
    const ShardMeta meta{"m-" + std::to_string(i), BoundingBox::point({lat, lon}),
                         {t, t + 295'000}};
    const auto r = choose_replicas(meta, partition, cfg, live);
    const std::set<EdgeId> distinct(r.begin(), r.end());
    const bool ok = distinct.size() == 3 &&
                    std::all_of(r.begin(), r.end(),
                                [&](EdgeId e) { return live.count(e) != 0; });
    const EdgeId want_s = hash_spatial({lat, lon}, partition);
    if (!ok || (live.count(want_s) && r[0] != want_s)) {
      res.passed = false;
      res.detail = "meta " + std::to_string(i) + " placed on non-distinct, dead "
                   "or wrong edges";
      return res;
    }
  }
  res.detail = std::to_string(metas) + " placements distinct and live";
  return res;
}

PropertyResult verify_voronoi_nearest(std::uint64_t seed, std::size_t points,
                                      const VoronoiPartition& partition) {
  PropertyResult res{"voronoi nearest site", true, false, "", seed};
  Rng rng(derive_seed(seed, "voronoi"));
  const BoundingBox& region = partition.region();
  for (std::size_t i = 0; i < points; ++i) {
    const GeoPoint p{region.south() + uniform01(rng) * (region.north() - region.south()),
                     region.west() + uniform01(rng) * (region.east() - region.west())};
    const EdgeId got = partition.locate(p);
    auto d2 = [&](GeoPoint s) {
      return (s.lat - p.lat) * (s.lat - p.lat) + (s.lon - p.lon) * (s.lon - p.lon);
    };
    double best = INFINITY;
    for (const auto& c : partition.cells()) best = std::min(best, d2(c.site));
    if (d2(partition.cell(got).site) > best + 1e-12) {
      res.passed = false;
      res.detail = "point " + std::to_string(i) + " located in a farther cell";
      return res;
    }
  }
  res.detail = std::to_string(points) + " points land in the nearest site's cell";
  return res;
}

VerifyReport verify(const ExperimentConfig& cfg, const VerifyOptions& opts) {
  VerifyReport report;
  auto& out = report.results;
  const Cluster probe(cfg);
  const auto& dep = probe.deployment();

  out.push_back(verify_plan_coverage(cfg.seed, opts.coverage_maps,
                                     standard_planners(opts.inject_duplicate_replica)));
  out.push_back(verify_min_shards_dominance(cfg.seed, 2000));
  out.push_back(verify_algorithm_fixture());
  out.push_back(verify_slice_agreement(
      cfg.seed, opts.slice_pairs, dep.hash, dep.partition,
      opts.inject_grid_anchor_bug ? SpatialQueryFn(misanchored_spatial_query_edges)
                                  : SpatialQueryFn(spatial_query_edges)));
  out.push_back(verify_batch_equivalence(cfg.seed, {1, 149, 150, 151, 300, 1000}));
  out.push_back(verify_replica_placement(cfg.seed, 10'000, dep.hash, dep.partition));
  out.push_back(verify_voronoi_nearest(cfg.seed, 10'000, dep.partition));
  if (!opts.cluster_checks) return report;

  LoadedCluster loaded = load_cluster(cfg);
  Cluster& c = *loaded.cluster;
  const auto queries = workload_queries(cfg, loaded);
  std::vector<std::vector<RowKey>> expected;
  for (const auto& q : queries) expected.push_back(loaded.oracle.evaluate(q.query));

  PropertyResult eq{"oracle equivalence", true, false, "", cfg.seed};
  PropertyResult dom{"minshards dominance per query", true, false, "", cfg.seed};
  std::map<PlannerKind, std::vector<QueryStats>> rc_stats;
  std::size_t runs = 0;
  for (PlannerKind planner :
       {PlannerKind::random, PlannerKind::min_shards, PlannerKind::min_edges}) {
    for (const auto& policy : {CoordinatorPolicy::random(), CoordinatorPolicy::local(0),
                               CoordinatorPolicy::local(3)}) {
      QueryOptions qo;
      qo.planner = planner;
      qo.batch_size = cfg.batch_size;
      c.settle();
      ++runs;
      run_queries(c, queries, qo, policy, 1, c.transport().now(),
                  [&](std::size_t i, QueryOutcome& o) {
                    const ResultScore s = score(row_keys(o.response.rows), expected[i]);
                    if (eq.passed && (!s.exact() || !o.response.ok)) {
                      eq.passed = false;
                      eq.detail = std::string(to_string(planner)) + "/" +
                                  to_string(policy) + " query " + std::to_string(i) +
                                  ": " + std::to_string(s.missing) + " missing, " +
                                  std::to_string(s.extra) + " extra, " +
                                  std::to_string(s.duplicates) + " duplicated";
                    }
                    if (!policy.locality_aware) {
                      rc_stats[planner].resize(queries.size());
                      rc_stats[planner][i] = o.response.stats;
                    }
                  });
    }
  }
  if (eq.passed) {
    eq.detail = std::to_string(queries.size()) + " queries x " +
                std::to_string(runs) + " planner/coordinator runs match the oracle";
  }
  out.push_back(eq);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto& a = rc_stats[PlannerKind::min_shards][i];
    const auto& b = rc_stats[PlannerKind::min_edges][i];
    if (a.mean_shards_per_edge > b.mean_shards_per_edge + 1e-12 ||
        a.max_shards_per_edge > b.max_shards_per_edge) {
      dom.passed = false;
      dom.detail = "query " + std::to_string(i) + ": minshards mean/max " +
                   fixed(a.mean_shards_per_edge, 3) + "/" +
                   std::to_string(a.max_shards_per_edge) + " vs minedges " +
                   fixed(b.mean_shards_per_edge, 3) + "/" +
                   std::to_string(b.max_shards_per_edge);
      break;
    }
  }
  if (dom.passed) dom.detail = std::to_string(queries.size()) + " queries";
  out.push_back(dom);

  const LoadBalance lb = load_balance(c);
  PropertyResult bal{"replica load balance", lb.ratio <= 1.25, true,
                     "max/min " + fixed(lb.ratio, 3) + " over " +
                         std::to_string(lb.edges.size()) +
                         " edges; per-edge dimension share in [" +
                         fixed(lb.min_edge_share, 3) + ", " +
                         fixed(lb.max_edge_share, 3) + "]",
                     cfg.seed};
  out.push_back(bal);
  return report;
}

}  // namespace aerialdb
