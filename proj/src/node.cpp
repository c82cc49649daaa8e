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

#include "aerialdb/node.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "aerialdb/errors.hpp"
#include "aerialdb/planner.hpp"

namespace aerialdb {

struct EdgeNode::InsertOp {
  ShardPayloadPtr shard;
  Responder client;
  std::array<EdgeId, 3> replicas{};
  std::array<int, 3> attempts{};
  EdgeSet failed_edges;
  std::size_t outstanding = 0;
  bool failed = false;
  std::string error;
  InsertResponse response;
};

struct EdgeNode::QueryOp {
  Query query;
  QueryOptions options;
  Responder client;
  QueryStats stats;
  EdgeSet asked;
  EdgeSet failed_edges;
  bool lookup_timed_out = false;
  std::map<std::string, ShardIndexEntry> entries;
  std::set<std::string> unreachable;
  std::set<std::string> retry;
  bool replanned = false;
  std::size_t outstanding = 0;
  std::vector<ResultRow> rows;
  std::vector<AggregateRow> aggregates;
};

EdgeNode::EdgeNode(EdgeId id, Transport& transport,
                   std::shared_ptr<const Deployment> deployment)
    : id_(id),
      transport_(transport),
      dep_(std::move(deployment)),
      index_(dep_->hash),
      rng_(derive_seed(dep_->seed, "edge-planner", to_u32(id))) {
  transport_.attach(Address::edge(id_), [this](Message&& m, const Responder& r) {
    on_message(std::move(m), r);
  });
}

Message EdgeNode::make(MessageKind kind, EdgeId to, Payload payload) const {
  Message m;
  m.kind = kind;
  m.source = Address::edge(id_);
  m.destination = Address::edge(to);
  m.payload = std::move(payload);
  return m;
}

void EdgeNode::on_message(Message&& m, const Responder& r) {
  auto& p = m.payload;
  if (auto* x = std::get_if<InsertRequest>(&p)) {
    handle_insert(std::move(*x), r);
  } else if (auto* x = std::get_if<QueryRequest>(&p)) {
    handle_query(std::move(*x), r);
  } else if (auto* x = std::get_if<ReplicateShard>(&p)) {
    on_replicate(std::move(*x), r);
  } else if (auto* x = std::get_if<IndexShard>(&p)) {
    on_index(std::move(*x), r);
  } else if (auto* x = std::get_if<LookupIndexRequest>(&p)) {
    on_lookup(std::move(*x), r);
  } else if (auto* x = std::get_if<ExecSubQuery>(&p)) {
    on_sub_query(std::move(*x), r);
  }
}

// ---- insertion ----------------------------------------------------------

void EdgeNode::handle_insert(InsertRequest req, const Responder& r) {
  auto op = std::make_shared<InsertOp>();
  op->shard = std::move(req.shard);
  op->client = r;
  if (!op->shard) {
    InsertResponse resp;
    resp.error = "invalid_shard: empty payload";
    r.reply(std::move(resp));
    return;
  }
  const EdgeSet live = transport_.alive_set(id_);
  try {
    op->replicas =
        choose_replicas(op->shard->meta(), dep_->partition, dep_->hash, live);
  } catch (const Error& e) {
    InsertResponse resp;
    resp.error = std::string(errc_name(e.code())) + ": " + e.what();
    r.reply(std::move(resp));
    return;
  }
  op->outstanding = 3;
  for (std::size_t slot = 0; slot < 3; ++slot) replicate(op, slot);
}

void EdgeNode::replicate(const std::shared_ptr<InsertOp>& op,
                         std::size_t slot) {
  const EdgeId target = op->replicas[slot];
  ReplicateShard msg{op->shard, static_cast<ReplicaRole>(slot)};
  transport_.send(
      make(MessageKind::replicate_shard, target, std::move(msg)),
      [this, op, slot, target](Delivery&& d) {
        if (!d.ok()) {
          op->failed_edges.insert(target);
          if (op->attempts[slot] == 0) {
            op->attempts[slot] = 1;
            ++op->response.replica_retries;
            EdgeSet exclude(op->replicas.begin(), op->replicas.end());
            exclude.insert(op->failed_edges.begin(), op->failed_edges.end());
            try {
              op->replicas[slot] = successor(target, dep_->hash,
                                             transport_.alive_set(id_), exclude);
              replicate(op, slot);
              return;
            } catch (const Error& e) {
              op->error = std::string(errc_name(e.code())) + ": " + e.what();
            }
          } else {
            op->error = "replica " + to_string(target) + " timed out";
          }
          op->failed = true;
        }
        if (--op->outstanding == 0) {
          if (op->failed) {
            op->response.ok = false;
            op->response.error = op->error;
            op->client.reply(std::move(op->response));
          } else {
            index_phase(op);
          }
        }
      });
}

void EdgeNode::index_phase(const std::shared_ptr<InsertOp>& op) {
  ShardIndexEntry entry{op->shard->shard_id(), op->shard->bbox(),
                        op->shard->range(), op->replicas};
  const EdgeSet targets =
      index_edges_for(entry, dep_->hash, dep_->partition).all(entry);
  const EdgeSet live = transport_.alive_set(id_);
  op->response.replicas = op->replicas;
  op->response.index_edges = targets.size();

  std::vector<EdgeId> send_to;
  for (EdgeId e : targets) {
    if (live.count(e)) send_to.push_back(e);
  }
  op->outstanding = send_to.size();
  if (send_to.empty()) {
    op->response.ok = true;
    op->client.reply(std::move(op->response));
    return;
  }
  for (EdgeId e : send_to) {
    transport_.send(make(MessageKind::index_shard, e, IndexShard{entry}),
                    [op](Delivery&&) {
                      // A lost index copy is tolerated: the replicas also
                      // hold the entry.
                      if (--op->outstanding == 0) {
                        op->response.ok = true;
                        op->client.reply(std::move(op->response));
                      }
                    });
  }
}

void EdgeNode::on_replicate(ReplicateShard msg, const Responder& r) {
  if (!msg.shard) return;
  transport_.charge(dep_->cost.insert_per_tuple *
                    static_cast<std::int64_t>(msg.shard->size()));
  if (!store_.contains(msg.shard->shard_id())) {
    switch (msg.role) {
      case ReplicaRole::spatial: ++counts_.spatial; break;
      case ReplicaRole::temporal: ++counts_.temporal; break;
      case ReplicaRole::id: ++counts_.id; break;
    }
  }
  store_.insert_payload(std::move(msg.shard));
  r.reply(Ack{});
}

void EdgeNode::on_index(IndexShard msg, const Responder& r) {
  transport_.charge(dep_->cost.index_add);
  index_.add(msg.entry);
  r.reply(Ack{});
}

// ---- querying -----------------------------------------------------------

void EdgeNode::on_lookup(LookupIndexRequest msg, const Responder& r) {
  transport_.charge(dep_->cost.lookup);
  const Query& q = msg.filter;
  LookupIndexResponse resp;
  if (q.combinator == Combinator::all_of) {
    std::vector<ShardIndexEntry> candidates;
    if (q.shard_id) {
      if (auto e = index_.lookup_id(*q.shard_id)) candidates.push_back(*e);
    } else if (q.range) {
      candidates = index_.lookup_temporal(*q.range);
    } else if (q.bbox) {
      candidates = index_.lookup_spatial(*q.bbox);
    }
    for (auto& e : candidates) {
      if (q.may_match(e.meta())) resp.entries.push_back(std::move(e));
    }
  } else {
    std::map<std::string, ShardIndexEntry> found;
    auto take = [&found](std::vector<ShardIndexEntry> v) {
      for (auto& e : v) found.try_emplace(e.shard_id, std::move(e));
    };
    if (q.shard_id) {
      if (auto e = index_.lookup_id(*q.shard_id)) take({*e});
    }
    if (q.range) take(index_.lookup_temporal(*q.range));
    if (q.bbox) take(index_.lookup_spatial(*q.bbox));
    for (auto& [id, e] : found) resp.entries.push_back(std::move(e));
  }
  r.reply(std::move(resp));
}

void EdgeNode::on_sub_query(ExecSubQuery msg, const Responder& r) {
  SubQueryResult result;
  try {
    result = store_.batch_execute(msg.sub_query, msg.batch_size);
  } catch (const Error&) {
    result = store_.execute(msg.sub_query);
  }
  const auto& c = dep_->cost;
  transport_.charge(
      c.sub_query_base +
      c.sub_query_per_shard *
          static_cast<std::int64_t>(msg.sub_query.shard_ids.size()) +
      c.sub_query_per_tuple * static_cast<std::int64_t>(result.tuples_scanned));
  r.reply(SubQueryResponse{std::move(result)});
}

void EdgeNode::handle_query(QueryRequest req, const Responder& r) {
  auto op = std::make_shared<QueryOp>();
  op->query = std::move(req.query);
  op->options = req.options;
  op->client = r;
  op->stats.coordinator = id_;
  try {
    op->query.validate();
    if (op->options.batch_size == 0) {
      throw Error(Errc::invalid_argument, "batch size must be positive");
    }
  } catch (const Error& e) {
    QueryResponse resp;
    resp.error = std::string(errc_name(e.code())) + ": " + e.what();
    resp.stats = op->stats;
    r.reply(std::move(resp));
    return;
  }
  const EdgeSet live = transport_.alive_set(id_);
  LookupPlan plan =
      lookup_edge_sets(op->query, dep_->hash, dep_->partition, live);
  op->stats.lookup_mode = plan.mode;
  op->stats.lookup_edges = plan.edges.size();
  lookup_phase(op, plan.edges, false);
}

void EdgeNode::lookup_phase(const std::shared_ptr<QueryOp>& op,
                            const EdgeSet& edges, bool fallback) {
  if (edges.empty()) {
    plan_phase(op);
    return;
  }
  op->outstanding = edges.size();
  op->asked.insert(edges.begin(), edges.end());
  for (EdgeId e : edges) {
    transport_.send(
        make(MessageKind::lookup_index, e, LookupIndexRequest{op->query}),
        [this, op, e, fallback](Delivery&& d) {
          if (d.ok()) {
            if (auto* resp = std::get_if<LookupIndexResponse>(&d.reply.payload)) {
              for (auto& entry : resp->entries) {
                op->entries.try_emplace(entry.shard_id, std::move(entry));
              }
            }
          } else {
            op->lookup_timed_out = true;
            op->failed_edges.insert(e);
          }
          if (--op->outstanding != 0) return;
          if (op->lookup_timed_out && !fallback) {
            // An index edge vanished: ask every other live edge.
            EdgeSet rest;
            for (EdgeId x : transport_.alive_set(id_)) {
              if (!op->asked.count(x) && !op->failed_edges.count(x)) {
                rest.insert(x);
              }
            }
            op->stats.lookup_mode = LookupMode::broadcast;
            op->stats.lookup_edges += rest.size();
            lookup_phase(op, rest, true);
            return;
          }
          plan_phase(op);
        });
  }
}

void EdgeNode::plan_phase(const std::shared_ptr<QueryOp>& op) {
  EdgeSet live = transport_.alive_set(id_);
  for (EdgeId e : op->failed_edges) live.erase(e);

  ReplicaMap shards;
  bool all_local = true;
  for (const auto& [id, entry] : op->entries) {
    std::vector<EdgeId> holders;
    for (EdgeId e : entry.replicas) {
      if (live.count(e) &&
          std::find(holders.begin(), holders.end(), e) == holders.end()) {
        holders.push_back(e);
      }
    }
    if (holders.empty()) {
      op->unreachable.insert(id);
      continue;
    }
    if (std::find(entry.replicas.begin(), entry.replicas.end(), id_) ==
        entry.replicas.end()) {
      all_local = false;
    }
    shards.emplace(id, std::move(holders));
  }
  op->stats.shards_matched = op->entries.size();

  if (shards.empty()) {
    finish_query(op);
    return;
  }
  const std::size_t n = op->options.local_threshold;
  if (n > 0 && all_local && shards.size() <= n) {
    std::set<std::string> ids;
    for (const auto& [id, holders] : shards) ids.insert(id);
    SubQuery sq = SubQuery::from_query(op->query, std::move(ids));
    SubQueryResult res = store_.batch_execute(sq, op->options.batch_size);
    const auto& c = dep_->cost;
    transport_.charge(
        c.sub_query_base +
        c.sub_query_per_shard * static_cast<std::int64_t>(shards.size()) +
        c.sub_query_per_tuple * static_cast<std::int64_t>(res.tuples_scanned));
    op->rows = std::move(res.rows);
    op->aggregates = std::move(res.aggregates);
    op->stats.executed_locally = true;
    op->stats.edges_queried = 1;
    op->stats.mean_shards_per_edge = static_cast<double>(shards.size());
    op->stats.max_shards_per_edge = shards.size();
    finish_query(op);
    return;
  }

  PlanAssignment plan = make_plan(op->options.planner, shards, live, rng_);
  op->unreachable.insert(plan.unreachable.begin(), plan.unreachable.end());
  op->stats.edges_queried = plan.edge_count();
  op->stats.mean_shards_per_edge = plan.mean_shards_per_edge();
  op->stats.max_shards_per_edge = plan.max_shards_per_edge();
  dispatch(op, plan);
}

void EdgeNode::dispatch(const std::shared_ptr<QueryOp>& op,
                        const PlanAssignment& plan) {
  if (plan.assignment.empty()) {
    finish_query(op);
    return;
  }
  op->outstanding = plan.assignment.size();
  for (const auto& [edge, ids] : plan.assignment) {
    ExecSubQuery msg{SubQuery::from_query(op->query, ids),
                     op->options.batch_size};
    transport_.send(
        make(MessageKind::exec_sub_query, edge, std::move(msg)),
        [this, op, edge = edge, ids = ids](Delivery&& d) {
          auto* resp = d.ok() ? std::get_if<SubQueryResponse>(&d.reply.payload)
                              : nullptr;
          if (resp != nullptr) {
            auto& res = resp->result;
            std::move(res.rows.begin(), res.rows.end(),
                      std::back_inserter(op->rows));
            std::move(res.aggregates.begin(), res.aggregates.end(),
                      std::back_inserter(op->aggregates));
          } else {
            op->failed_edges.insert(edge);
            op->retry.insert(ids.begin(), ids.end());
          }
          if (--op->outstanding != 0) return;
          if (op->retry.empty()) {
            finish_query(op);
            return;
          }
          std::set<std::string> retry = std::move(op->retry);
          op->retry.clear();
          if (op->replanned) {
            op->unreachable.insert(retry.begin(), retry.end());
            finish_query(op);
            return;
          }
          op->replanned = true;
          ++op->stats.replans;
          EdgeSet live = transport_.alive_set(id_);
          for (EdgeId e : op->failed_edges) live.erase(e);
          ReplicaMap shards;
          for (const auto& id : retry) {
            std::vector<EdgeId> holders;
            for (EdgeId e : op->entries.at(id).replicas) {
              if (live.count(e)) holders.push_back(e);
            }
            if (holders.empty()) {
              op->unreachable.insert(id);
            } else {
              shards.emplace(id, std::move(holders));
            }
          }
          PlanAssignment again =
              make_plan(op->options.planner, shards, live, rng_);
          op->unreachable.insert(again.unreachable.begin(),
                                 again.unreachable.end());
          dispatch(op, again);
        });
  }
}

void EdgeNode::finish_query(const std::shared_ptr<QueryOp>& op) {
  QueryResponse resp;
  resp.ok = true;
  std::sort(op->rows.begin(), op->rows.end(), result_row_less);
  std::sort(op->aggregates.begin(), op->aggregates.end(),
            [](const AggregateRow& a, const AggregateRow& b) {
              return a.shard_id < b.shard_id;
            });
  resp.rows = std::move(op->rows);
  resp.aggregates = std::move(op->aggregates);
  resp.unreachable_shards.assign(op->unreachable.begin(), op->unreachable.end());
  resp.stats = op->stats;
  op->client.reply(std::move(resp));
}

}  // namespace aerialdb
