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

#include "aerialdb/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <tuple>

#include "aerialdb/errors.hpp"

namespace aerialdb {

std::string fixed(double v, int decimals) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

namespace {

constexpr std::uint32_t kQueryClientBase = 1u << 24;

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, std::string_view schema,
          const ExperimentConfig& cfg)
      : out_(path, std::ios::binary) {
    if (!out_) {
      throw Error(Errc::invalid_config, "cannot write " + path.string());
    }
    out_ << "# schema = " << schema << "\n";
    for (const auto& [k, v] : cfg.entries()) out_ << "# " << k << " = " << v << "\n";
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Nearest-rank percentile.
double percentile(std::vector<double> v, double p) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(p / 100.0 * static_cast<double>(v.size())));
  return v[std::min(v.size() - 1, rank == 0 ? 0 : rank - 1)];
}

std::string edge_list(const EdgeSet& s) {
  std::string out;
  for (EdgeId e : s) {
    if (!out.empty()) out += ' ';
    out += to_string(e);
  }
  return out;
}

EdgeSet failed_edges(Cluster& c) {
  EdgeSet out;
  const EdgeSet up = c.transport().up_edges();
  for (EdgeId e : c.edge_ids()) {
    if (!up.count(e)) out.insert(e);
  }
  return out;
}

std::vector<std::string> query_row(const std::string& op, std::size_t index,
                                   const GridQuery& gq,
                                   const ExperimentConfig& cfg,
                                   std::size_t clients, const EdgeSet& failed,
                                   const QueryOutcome& o, const ResultScore& s,
                                   bool exact) {
  const auto& st = o.response.stats;
  return {op,
          std::to_string(index),
          gq.cell,
          std::string(to_string(cfg.planner)),
          to_string(cfg.coordinator),
          std::to_string(clients),
          edge_list(failed),
          to_string(o.coordinator),
          fixed(to_ms(o.latency), 3),
          std::to_string(st.shards_matched),
          std::to_string(st.edges_queried),
          fixed(st.mean_shards_per_edge, 4),
          std::to_string(st.max_shards_per_edge),
          st.executed_locally ? "1" : "0",
          std::to_string(st.replans),
          std::to_string(s.returned),
          std::to_string(s.expected),
          fixed(s.recall(), 6),
          o.response.partial() ? "1" : "0",
          std::to_string(o.response.unreachable_shards.size()),
          exact ? "1" : "0"};
}

const std::vector<std::string> kQueryColumns = {
    "op", "index", "cell", "planner", "coordinator", "clients", "failed_edges",
    "coordinator_edge", "latency_ms", "shards_matched", "edges_queried",
    "mean_shards_per_edge", "max_shards_per_edge", "executed_locally",
    "replans", "rows", "expected_rows", "recall", "partial",
    "unreachable_shards", "exact"};

}  // namespace

LoadedCluster load_cluster(const ExperimentConfig& cfg, LoadOptions opts) {
  LoadedCluster out;
  out.cluster = std::make_unique<Cluster>(cfg);
  Cluster& c = *out.cluster;

  const std::int64_t period =
      cfg.emit.walk.sample_period_ms *
      static_cast<std::int64_t>(cfg.emit.samples_per_shard);
  const std::int64_t periods = cfg.duration_ms() / period;
  if (periods < 1) {
    throw Error(Errc::invalid_config, "duration shorter than one shard period");
  }
  const std::uint64_t drone_seed = derive_seed(cfg.seed, "drones");
  std::vector<ShardEmitter> emitters;
  emitters.reserve(cfg.drone_count);
  for (std::uint32_t d = 0; d < cfg.drone_count; ++d) {
    emitters.emplace_back(c.roads(), c.sensors(), d, cfg.epoch_origin,
                          drone_seed, cfg.emit);
  }

  bool first = true;
  std::size_t index = 0;
  for (std::int64_t j = 0; j < periods; ++j) {
    Timestamp emitted_at = 0;
    for (std::uint32_t d = 0; d < cfg.drone_count; ++d) {
      EmittedShard e = emitters[d].next();
      if (first) {
        out.extent = e.shard.bbox;
        out.time_extent = e.shard.range;
        first = false;
      } else {
        out.extent.extend(e.shard.bbox.top_left);
        out.extent.extend(e.shard.bbox.bottom_right);
        out.time_extent.start = std::min(out.time_extent.start, e.shard.range.start);
        out.time_extent.end = std::max(out.time_extent.end, e.shard.range.end);
      }
      if (opts.build_oracle) out.oracle.add(e.shard);
      emitted_at = e.emit_time;
      const std::size_t idx = index++;
      c.submit_insert(d, c.to_sim(e.emit_time),
                      ShardPayload::from_shard(e.shard), e.position,
                      [&out, idx, d, id = e.shard.shard_id,
                       keep = opts.keep_records](InsertOutcome o) {
                        if (o.response.ok) {
                          out.placements[id] = o.response.replicas;
                        } else {
                          ++out.failed_inserts;
                        }
                        if (keep) {
                          out.inserts.push_back({idx, d, id, std::move(o)});
                        }
                      });
    }
    c.transport().run_until(c.to_sim(emitted_at) +
                            std::chrono::milliseconds(period / 2));
  }
  c.transport().run();
  std::sort(out.inserts.begin(), out.inserts.end(),
            [](const InsertRecord& a, const InsertRecord& b) {
              return a.index < b.index;
            });
  return out;
}

void run_queries(Cluster& cluster, const std::vector<GridQuery>& queries,
                 const QueryOptions& options, const CoordinatorPolicy& policy,
                 std::size_t clients, SimTime start,
                 const QueryObserver& observe) {
  if (clients == 0) throw Error(Errc::invalid_argument, "clients must be >= 1");
  // Each client walks its own slice of the list; completions trigger the
  // client's next query.
  std::function<void(std::size_t, SimTime)> issue;
  issue = [&](std::size_t i, SimTime at) {
    if (i >= queries.size()) return;
    const auto client =
        kQueryClientBase + static_cast<std::uint32_t>(i % clients);
    cluster.submit_query(client, at, queries[i].query, options, policy,
                         [&, i](QueryOutcome o) {
                           observe(i, o);
                           issue(i + clients, cluster.transport().now());
                         });
  };
  for (std::size_t k = 0; k < clients && k < queries.size(); ++k) {
    issue(k, start);
  }
  cluster.transport().run();
}

std::vector<GridQuery> workload_queries(const ExperimentConfig& cfg,
                                        const LoadedCluster& loaded) {
  return query_grid(derive_seed(cfg.seed, "queries"), cfg.query_count_per_cell,
                    loaded.extent, loaded.time_extent);
}

LoadBalance load_balance(const Cluster& cluster) {
  LoadBalance lb;
  std::array<std::size_t, 3> dim_total{};
  std::array<std::size_t, 3> dim_min{};
  std::array<std::size_t, 3> dim_max{};
  dim_min.fill(std::numeric_limits<std::size_t>::max());
  lb.min_total = std::numeric_limits<std::size_t>::max();
  lb.min_edge_share = 1.0;
  for (const auto& node : cluster.nodes()) {
    EdgeLoad e{node->id(), node->replica_counts(), node->index().size(),
               node->store().tuple_count()};
    const std::array<std::size_t, 3> dims{e.replicas.spatial,
                                          e.replicas.temporal, e.replicas.id};
    const std::size_t total = e.replicas.total();
    lb.min_total = std::min(lb.min_total, total);
    lb.max_total = std::max(lb.max_total, total);
    for (std::size_t k = 0; k < 3; ++k) {
      dim_total[k] += dims[k];
      dim_min[k] = std::min(dim_min[k], dims[k]);
      dim_max[k] = std::max(dim_max[k], dims[k]);
      const double share =
          total == 0 ? 0.0 : static_cast<double>(dims[k]) / static_cast<double>(total);
      lb.min_edge_share = std::min(lb.min_edge_share, share);
      lb.max_edge_share = std::max(lb.max_edge_share, share);
    }
    lb.edges.push_back(e);
  }
  auto ratio = [](std::size_t hi, std::size_t lo) {
    return lo == 0 ? std::numeric_limits<double>::infinity()
                   : static_cast<double>(hi) / static_cast<double>(lo);
  };
  lb.ratio = ratio(lb.max_total, lb.min_total);
  const double all =
      static_cast<double>(dim_total[0] + dim_total[1] + dim_total[2]);
  for (std::size_t k = 0; k < 3; ++k) {
    lb.dimension_share[k] = all == 0 ? 0.0 : dim_total[k] / all;
    lb.dimension_ratio[k] = ratio(dim_max[k], dim_min[k]);
  }
  return lb;
}

std::vector<RowKey> surviving_rows(
    const std::vector<RowKey>& expected,
    const std::map<std::string, std::array<EdgeId, 3>>& placements,
    const EdgeSet& failed) {
  std::vector<RowKey> out;
  out.reserve(expected.size());
  for (const auto& r : expected) {
    auto it = placements.find(r.shard_id);
    bool lost = it != placements.end();
    if (lost) {
      for (EdgeId e : it->second) lost = lost && failed.count(e) != 0;
    }
    if (!lost) out.push_back(r);
  }
  return out;
}

RunResult run_insert(const ExperimentConfig& cfg,
                     const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  LoadedCluster loaded = load_cluster(cfg, {false, true});
  RunResult res;

  const auto insert_path = out_dir / "insert.csv";
  {
    CsvFile csv(insert_path, "aerialdb.insert.v1", cfg);
    csv.row({"op", "index", "drone_id", "shard_id", "parent_edge", "latency_ms",
             "ok", "replica_spatial", "replica_temporal", "replica_id",
             "index_edges", "retries"});
    for (const auto& r : loaded.inserts) {
      const auto& resp = r.outcome.response;
      csv.row({"insert", std::to_string(r.index), std::to_string(r.drone_id),
               r.shard_id, to_string(r.outcome.parent),
               fixed(to_ms(r.outcome.latency), 3), resp.ok ? "1" : "0",
               to_string(resp.replicas[0]), to_string(resp.replicas[1]),
               to_string(resp.replicas[2]), std::to_string(resp.index_edges),
               std::to_string(resp.replica_retries)});
    }
  }
  res.files.push_back(insert_path);

  const LoadBalance lb = load_balance(*loaded.cluster);
  const auto load_path = out_dir / "edge_load.csv";
  {
    CsvFile csv(load_path, "aerialdb.edge_load.v1", cfg);
    csv.row({"edge_id", "replicas_total", "replicas_spatial",
             "replicas_temporal", "replicas_id", "index_entries", "tuples"});
    for (const auto& e : lb.edges) {
      csv.row({to_string(e.edge), std::to_string(e.replicas.total()),
               std::to_string(e.replicas.spatial),
               std::to_string(e.replicas.temporal),
               std::to_string(e.replicas.id), std::to_string(e.index_entries),
               std::to_string(e.tuples)});
    }
  }
  res.files.push_back(load_path);

  std::vector<double> lat;
  for (const auto& r : loaded.inserts) lat.push_back(to_ms(r.outcome.latency));
  std::size_t replicas = 0;
  for (const auto& e : lb.edges) replicas += e.replicas.total();
  const auto summary_path = out_dir / "insert_summary.csv";
  {
    CsvFile csv(summary_path, "aerialdb.insert_summary.v1", cfg);
    csv.row({"metric", "value"});
    csv.row({"shards", std::to_string(loaded.inserts.size())});
    csv.row({"failed_inserts", std::to_string(loaded.failed_inserts)});
    csv.row({"replicas", std::to_string(replicas)});
    csv.row({"latency_mean_ms", fixed(mean(lat), 3)});
    csv.row({"latency_p50_ms", fixed(percentile(lat, 50), 3)});
    csv.row({"latency_p95_ms", fixed(percentile(lat, 95), 3)});
    csv.row({"replicas_min", std::to_string(lb.min_total)});
    csv.row({"replicas_max", std::to_string(lb.max_total)});
    csv.row({"replicas_ratio", fixed(lb.ratio, 4)});
    static const char* dims[] = {"spatial", "temporal", "id"};
    for (std::size_t k = 0; k < 3; ++k) {
      csv.row({std::string("share_") + dims[k], fixed(lb.dimension_share[k], 4)});
      csv.row({std::string("ratio_") + dims[k], fixed(lb.dimension_ratio[k], 4)});
    }
    csv.row({"edge_share_min", fixed(lb.min_edge_share, 4)});
    csv.row({"edge_share_max", fixed(lb.max_edge_share, 4)});
  }
  res.files.push_back(summary_path);
  res.summary = std::to_string(loaded.inserts.size()) + " shards, " +
                std::to_string(replicas) + " replicas, max/min " +
                fixed(lb.ratio, 3) + ", failed " +
                std::to_string(loaded.failed_inserts);
  res.exit_code = loaded.failed_inserts == 0 ? 0 : 1;
  return res;
}

RunResult run_query(const ExperimentConfig& cfg,
                    const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  LoadedCluster loaded = load_cluster(cfg);
  Cluster& c = *loaded.cluster;
  const auto queries = workload_queries(cfg, loaded);
  std::vector<std::vector<RowKey>> expected;
  expected.reserve(queries.size());
  for (const auto& q : queries) expected.push_back(loaded.oracle.evaluate(q.query));

  QueryOptions options;
  options.planner = cfg.planner;
  options.batch_size = cfg.batch_size;

  RunResult res;
  const auto path = out_dir / "query.csv";
  CsvFile csv(path, "aerialdb.query.v1", cfg);
  csv.row(kQueryColumns);

  struct Agg {
    std::vector<double> latency, shards_per_edge, edges, recall;
  };
  std::map<std::tuple<std::size_t, int, int>, Agg> summary;
  std::size_t violations = 0;
  for (std::size_t clients : cfg.query_clients) {
    c.settle();
    std::vector<std::vector<std::string>> rows(queries.size());
    run_queries(c, queries, options, cfg.coordinator, clients,
                c.transport().now(), [&](std::size_t i, QueryOutcome& o) {
                  const ResultScore s = score(row_keys(o.response.rows), expected[i]);
                  if (!s.exact() || !o.response.ok) ++violations;
                  rows[i] = query_row("query", i, queries[i], cfg, clients, {}, o,
                                      s, s.exact());
                  auto& a = summary[{clients, queries[i].window_index, queries[i].side_index}];
                  a.latency.push_back(to_ms(o.latency));
                  a.shards_per_edge.push_back(o.response.stats.mean_shards_per_edge);
                  a.edges.push_back(static_cast<double>(o.response.stats.edges_queried));
                  a.recall.push_back(s.recall());
                });
    for (const auto& r : rows) csv.row(r);
  }
  res.files.push_back(path);

  const auto spath = out_dir / "query_summary.csv";
  {
    CsvFile s(spath, "aerialdb.query_summary.v1", cfg);
    s.row({"clients", "cell", "queries", "latency_mean_ms", "latency_p50_ms",
           "latency_p95_ms", "mean_shards_per_edge", "mean_edges_queried",
           "recall_min", "recall_mean"});
    for (const auto& [key, a] : summary) {
      s.row({std::to_string(std::get<0>(key)),
             grid_cell_name(std::get<1>(key), std::get<2>(key)),
             std::to_string(a.latency.size()), fixed(mean(a.latency), 3),
             fixed(percentile(a.latency, 50), 3),
             fixed(percentile(a.latency, 95), 3),
             fixed(mean(a.shards_per_edge), 4), fixed(mean(a.edges), 4),
             fixed(*std::min_element(a.recall.begin(), a.recall.end()), 6),
             fixed(mean(a.recall), 6)});
    }
  }
  res.files.push_back(spath);
  res.summary = std::to_string(queries.size()) + " queries x " +
                std::to_string(cfg.query_clients.size()) +
                " client settings, " + std::to_string(violations) +
                " oracle mismatches";
  res.exit_code = violations == 0 && loaded.failed_inserts == 0 ? 0 : 1;
  return res;
}

RunResult run_failure(const ExperimentConfig& cfg,
                      const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  LoadedCluster loaded = load_cluster(cfg);
  Cluster& c = *loaded.cluster;
  const auto queries = workload_queries(cfg, loaded);
  std::vector<std::vector<RowKey>> expected;
  expected.reserve(queries.size());
  for (const auto& q : queries) expected.push_back(loaded.oracle.evaluate(q.query));

  QueryOptions options;
  options.planner = cfg.planner;
  options.batch_size = cfg.batch_size;
  const std::size_t clients = cfg.query_clients.front();

  struct Trial {
    std::size_t count;
    std::vector<FailureEvent> events;
  };
  std::vector<Trial> trials;
  if (!cfg.failure_schedule.empty()) {
    trials.push_back({cfg.failure_schedule.size(), cfg.failure_schedule});
  } else {
    for (std::size_t count : cfg.failure_counts) {
      Rng rng(derive_seed(cfg.seed, "failure-set", count));
      const std::size_t n = count == 0 ? 1 : cfg.failure_trials;
      for (std::size_t t = 0; t < n; ++t) {
        std::vector<EdgeId> pool = c.edge_ids();
        Trial trial{count, {}};
        for (std::size_t k = 0; k < count; ++k) {
          const auto pick = k + uniform_index(rng, pool.size() - k);
          std::swap(pool[k], pool[pick]);
          trial.events.push_back({-1, pool[k]});
        }
        trials.push_back(std::move(trial));
      }
    }
  }

  RunResult res;
  const auto path = out_dir / "failure.csv";
  CsvFile csv(path, "aerialdb.failure.v1", cfg);
  auto columns = kQueryColumns;
  columns.insert(columns.begin() + 1, "trial");
  columns.insert(columns.begin() + 2, "failure_count");
  csv.row(columns);

  struct Agg {
    std::size_t trials = 0, queries = 0, expected = 0, matched = 0, exact = 0;
    std::vector<double> latency;
  };
  std::map<std::size_t, Agg> summary;
  std::size_t violations = 0;

  for (std::size_t t = 0; t < trials.size(); ++t) {
    const Trial& trial = trials[t];
    c.settle();
    SimTime start = c.transport().now();
    for (const auto& ev : trial.events) {
      if (ev.at_ms < 0) {
        c.fail(ev.edge);
      } else {
        const EdgeId e = ev.edge;
        c.transport().post(start + std::chrono::milliseconds(ev.at_ms),
                           [&c, e] { c.fail(e); });
      }
    }
    if (!trial.events.empty() && trial.events.front().at_ms < 0) {
      c.settle();
      start = c.transport().now();
    }
    std::vector<std::vector<std::string>> rows(queries.size());
    auto& agg = summary[trial.count];
    ++agg.trials;
    run_queries(c, queries, options, cfg.coordinator, clients, start,
                [&](std::size_t i, QueryOutcome& o) {
                  const EdgeSet failed = failed_edges(c);
                  const auto keys = row_keys(o.response.rows);
                  const ResultScore full = score(keys, expected[i]);
                  const ResultScore degraded = score(
                      keys, surviving_rows(expected[i], loaded.placements, failed));
                  if (failed.size() <= 2 && !full.exact()) ++violations;
                  auto row = query_row("failure", i, queries[i], cfg, clients,
                                       failed, o, full, degraded.exact());
                  row.insert(row.begin() + 1, std::to_string(t));
                  row.insert(row.begin() + 2, std::to_string(trial.count));
                  rows[i] = std::move(row);
                  ++agg.queries;
                  agg.expected += full.expected;
                  agg.matched += full.matched;
                  agg.exact += degraded.exact() ? 1 : 0;
                  agg.latency.push_back(to_ms(o.latency));
                });
    for (const auto& r : rows) csv.row(r);
    for (EdgeId e : c.edge_ids()) c.recover(e);
  }
  res.files.push_back(path);

  const auto spath = out_dir / "failure_summary.csv";
  {
    CsvFile s(spath, "aerialdb.failure_summary.v1", cfg);
    s.row({"failure_count", "trials", "queries", "expected_rows",
           "matched_rows", "recall", "degradation_exact_fraction",
           "latency_mean_ms", "latency_p95_ms"});
    for (const auto& [count, a] : summary) {
      const double recall =
          a.expected == 0 ? 1.0 : static_cast<double>(a.matched) / a.expected;
      s.row({std::to_string(count), std::to_string(a.trials),
             std::to_string(a.queries), std::to_string(a.expected),
             std::to_string(a.matched), fixed(recall, 6),
             fixed(a.queries == 0 ? 1.0 : static_cast<double>(a.exact) / a.queries, 6),
             fixed(mean(a.latency), 3), fixed(percentile(a.latency, 95), 3)});
    }
  }
  res.files.push_back(spath);
  res.summary = std::to_string(trials.size()) + " failure trials, " +
                std::to_string(violations) +
                " queries lost data with <= 2 failures";
  res.exit_code = violations == 0 ? 0 : 1;
  return res;
}

}  // namespace aerialdb
