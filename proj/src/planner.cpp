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

#include "aerialdb/planner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <tuple>

#include "aerialdb/errors.hpp"

namespace aerialdb {

EdgeId successor(EdgeId from, const HashConfig& cfg, const EdgeSet& live,
                 const EdgeSet& exclude) {
  const auto& ids = cfg.edge_ids;
  const auto start = static_cast<std::size_t>(
      std::upper_bound(ids.begin(), ids.end(), from) - ids.begin());
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const EdgeId e = ids[(start + k) % ids.size()];
    if (live.count(e) != 0 && exclude.count(e) == 0) return e;
  }
  throw Error(Errc::insufficient_live_edges,
              "no live successor for edge " + to_string(from));
}

std::array<EdgeId, 3> choose_replicas(const ShardMeta& meta,
                                      const VoronoiPartition& partition,
                                      const HashConfig& cfg,
                                      const EdgeSet& live) {
  std::size_t usable = 0;
  for (EdgeId e : cfg.edge_ids) usable += live.count(e);
  if (usable < 3)
    throw Error(Errc::insufficient_live_edges,
                "insertion needs at least three live edges");

  const std::array<EdgeId, 3> candidates = {
      hash_spatial(bbox_midpoint(meta.bbox), partition),
      hash_temporal(meta.range.midpoint(), cfg), hash_id(meta.shard_id, cfg)};
  std::array<EdgeId, 3> out{};
  EdgeSet chosen;
  for (std::size_t i = 0; i < 3; ++i) {
    const EdgeId c = candidates[i];
    out[i] = (live.count(c) != 0 && chosen.count(c) == 0)
                 ? c
                 : successor(c, cfg, live, chosen);
    chosen.insert(out[i]);
  }
  return out;
}

std::string_view to_string(LookupMode m) noexcept {
  switch (m) {
    case LookupMode::spatial: return "spatial";
    case LookupMode::temporal: return "temporal";
    case LookupMode::id: return "id";
    case LookupMode::union_all: return "union";
    case LookupMode::broadcast: return "broadcast";
  }
  return "?";
}

namespace {

bool all_live(const EdgeSet& s, const EdgeSet& live) {
  return std::all_of(s.begin(), s.end(),
                     [&](EdgeId e) { return live.count(e) != 0; });
}

}  // namespace

LookupPlan lookup_edge_sets(const Query& q, const HashConfig& cfg,
                            const VoronoiPartition& partition,
                            const EdgeSet& live) {
  if (!q.has_index_filter())
    throw Error(Errc::broadcast_query,
                "query needs a spatial, temporal or shard id filter");
  LookupPlan plan;
  if (q.bbox) plan.spatial = spatial_query_edges(*q.bbox, cfg, partition);
  if (q.range) plan.temporal = temporal_query_edges(*q.range, cfg);
  if (q.shard_id) plan.id.insert(hash_id(*q.shard_id, cfg));

  if (q.combinator == Combinator::all_of) {
    // Candidates in tie-break preference order.
    const std::array<std::tuple<bool, const EdgeSet*, LookupMode>, 3> sets = {{
        {q.shard_id.has_value(), &plan.id, LookupMode::id},
        {q.range.has_value(), &plan.temporal, LookupMode::temporal},
        {q.bbox.has_value(), &plan.spatial, LookupMode::spatial},
    }};
    const EdgeSet* best = nullptr;
    for (const auto& [present, set, mode] : sets) {
      if (!present || !all_live(*set, live)) continue;
      if (best == nullptr || set->size() < best->size()) {
        best = set;
        plan.mode = mode;
      }
    }
    if (best != nullptr) {
      plan.edges = *best;
      return plan;
    }
  } else {
    EdgeSet u = plan.spatial;
    u.insert(plan.temporal.begin(), plan.temporal.end());
    u.insert(plan.id.begin(), plan.id.end());
    if (all_live(u, live)) {
      plan.mode = LookupMode::union_all;
      plan.edges = std::move(u);
      return plan;
    }
  }
  plan.mode = LookupMode::broadcast;
  for (EdgeId e : cfg.edge_ids)
    if (live.count(e) != 0) plan.edges.insert(e);
  return plan;
}

std::size_t PlanAssignment::shard_count() const noexcept {
  std::size_t n = 0;
  for (const auto& [_, s] : assignment) n += s.size();
  return n;
}

double PlanAssignment::mean_shards_per_edge() const noexcept {
  if (assignment.empty()) return 0.0;
  return static_cast<double>(shard_count()) /
         static_cast<double>(assignment.size());
}

std::size_t PlanAssignment::max_shards_per_edge() const noexcept {
  std::size_t m = 0;
  for (const auto& [_, s] : assignment) m = std::max(m, s.size());
  return m;
}

std::string_view to_string(PlannerKind p) noexcept {
  switch (p) {
    case PlannerKind::random: return "random";
    case PlannerKind::min_shards: return "minshards";
    case PlannerKind::min_edges: return "minedges";
  }
  return "?";
}

PlannerKind parse_planner(std::string_view name) {
  if (name == "random") return PlannerKind::random;
  if (name == "minshards") return PlannerKind::min_shards;
  if (name == "minedges") return PlannerKind::min_edges;
  throw Error(Errc::invalid_argument, "unknown planner '" + std::string(name) +
                                          "' (random|minshards|minedges)");
}

namespace {

// Live replica holders per shard; shards with none go to `unreachable`.
std::map<std::string, std::vector<EdgeId>> live_replicas(
    const ReplicaMap& shards, const EdgeSet& live,
    std::vector<std::string>& unreachable) {
  std::map<std::string, std::vector<EdgeId>> out;
  for (const auto& [id, replicas] : shards) {
    std::vector<EdgeId> r;
    for (EdgeId e : replicas)
      if (live.count(e) != 0) r.push_back(e);
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    if (r.empty())
      unreachable.push_back(id);
    else
      out.emplace(id, std::move(r));
  }
  return out;
}

}  // namespace

PlanAssignment plan_random(const ReplicaMap& shards, const EdgeSet& live,
                           Rng& rng) {
  PlanAssignment plan;
  for (const auto& [id, r] : live_replicas(shards, live, plan.unreachable))
    plan.assignment[r[uniform_index(rng, r.size())]].insert(id);
  return plan;
}

PlanAssignment plan_min_shards(const ReplicaMap& shards, const EdgeSet& live) {
  PlanAssignment plan;
  const auto reps = live_replicas(shards, live, plan.unreachable);

  // Inverted map: edge -> unassigned shards it holds, ordered by (replica
  // count, shard id) so the front is the shard with the fewest replicas.
  using Key = std::pair<std::size_t, std::string>;
  std::map<EdgeId, std::set<Key>> by_edge;
  std::map<EdgeId, std::size_t> assigned;
  for (const auto& [id, r] : reps)
    for (EdgeId e : r) by_edge[e].insert({r.size(), id});

  std::size_t left = reps.size();
  while (left > 0) {
    auto best = by_edge.end();
    for (auto it = by_edge.begin(); it != by_edge.end(); ++it) {
      if (it->second.empty()) continue;
      if (best == by_edge.end() ||
          std::make_tuple(it->second.size(), assigned[it->first], it->first) <
              std::make_tuple(best->second.size(), assigned[best->first],
                              best->first))
        best = it;
    }
    const Key pick = *best->second.begin();
    plan.assignment[best->first].insert(pick.second);
    ++assigned[best->first];
    for (EdgeId e : reps.at(pick.second)) by_edge[e].erase(pick);
    --left;
  }
  return plan;
}

PlanAssignment plan_min_edges(const ReplicaMap& shards, const EdgeSet& live) {
  PlanAssignment plan;
  const auto reps = live_replicas(shards, live, plan.unreachable);

  std::map<EdgeId, std::set<std::string>> by_edge;
  for (const auto& [id, r] : reps)
    for (EdgeId e : r) by_edge[e].insert(id);

  std::size_t left = reps.size();
  while (left > 0) {
    auto best = by_edge.end();
    for (auto it = by_edge.begin(); it != by_edge.end(); ++it)
      if (best == by_edge.end() || it->second.size() > best->second.size())
        best = it;
    const EdgeId edge = best->first;
    std::set<std::string> taken = std::move(best->second);
    by_edge.erase(best);
    for (const std::string& id : taken)
      for (EdgeId e : reps.at(id)) {
        auto it = by_edge.find(e);
        if (it != by_edge.end()) it->second.erase(id);
      }
    left -= taken.size();
    plan.assignment.emplace(edge, std::move(taken));
  }
  return plan;
}

PlanAssignment make_plan(PlannerKind kind, const ReplicaMap& shards,
                         const EdgeSet& live, Rng& rng) {
  switch (kind) {
    case PlannerKind::random: return plan_random(shards, live, rng);
    case PlannerKind::min_shards: return plan_min_shards(shards, live);
    case PlannerKind::min_edges: return plan_min_edges(shards, live);
  }
  throw Error(Errc::invalid_argument, "unknown planner");
}

std::string to_string(const CoordinatorPolicy& p) {
  if (!p.locality_aware) return "rc";
  return "lc-" + std::to_string(p.local_threshold);
}

CoordinatorPolicy parse_coordinator(std::string_view name) {
  if (name == "rc") return CoordinatorPolicy::random();
  if (name.substr(0, 3) == "lc-") {
    std::size_t n = 0;
    const auto digits = name.substr(3);
    const auto res =
        std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (!digits.empty() && res.ec == std::errc{} &&
        res.ptr == digits.data() + digits.size())
      return CoordinatorPolicy::local(n);
  }
  throw Error(Errc::invalid_argument, "unknown coordinator strategy '" +
                                          std::string(name) + "' (rc|lc-<n>)");
}

EdgeId select_coordinator(const Query& q, const CoordinatorPolicy& policy,
                          const HashConfig& cfg,
                          const VoronoiPartition& partition,
                          const EdgeSet& live, Rng& rng) {
  if (live.empty())
    throw Error(Errc::insufficient_live_edges, "no live edge to coordinate");
  if (!policy.locality_aware) {
    auto it = live.begin();
    std::advance(it, static_cast<std::ptrdiff_t>(uniform_index(rng, live.size())));
    return *it;
  }
  if (q.bbox) {
    const GeoPoint c = bbox_midpoint(*q.bbox);
    const VoronoiCell* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const VoronoiCell& cell : partition.cells()) {
      if (live.count(cell.id) == 0) continue;
      const double d = std::hypot(cell.site.lat - c.lat, cell.site.lon - c.lon);
      if (d < best_d) {
        best_d = d;
        best = &cell;
      }
    }
    if (best != nullptr) return best->id;
  }
  EdgeId guess;
  if (q.range)
    guess = hash_temporal(std::max(q.range->midpoint(), cfg.epoch_origin), cfg);
  else if (q.shard_id)
    guess = hash_id(*q.shard_id, cfg);
  else
    guess = *live.begin();
  return live.count(guess) != 0 ? guess : successor(guess, cfg, live, {});
}

}  // namespace aerialdb
