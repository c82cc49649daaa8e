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

#include "aerialdb/protocol.hpp"

namespace aerialdb {

std::string_view to_string(MessageKind k) noexcept {
  switch (k) {
    case MessageKind::replicate_shard: return "ReplicateShard";
    case MessageKind::index_shard: return "IndexShard";
    case MessageKind::lookup_index: return "LookupIndex";
    case MessageKind::exec_sub_query: return "ExecSubQuery";
    case MessageKind::heartbeat: return "Heartbeat";
    case MessageKind::insert_request: return "InsertRequest";
    case MessageKind::query_request: return "QueryRequest";
    case MessageKind::response: return "Response";
  }
  return "?";
}

namespace {

constexpr std::size_t kHeader = 32;
constexpr std::size_t kEntryBytes = 72;  // bbox, range, replicas

std::size_t row_bytes(const ResultRow& r) {
  return 40 + r.tuple.shard_id.size() + 16 * r.tuple.fields.size();
}

std::size_t query_bytes(const Query& q) {
  return 64 + (q.shard_id ? q.shard_id->size() : 0) +
         24 * q.field_predicates.size();
}

struct Sizer {
  std::size_t operator()(const std::monostate&) const { return 0; }
  std::size_t operator()(const InsertRequest& m) const {
    return kHeader + (m.shard ? m.shard->wire_bytes() + kEntryBytes : 0);
  }
  std::size_t operator()(const InsertResponse& m) const {
    return kHeader + m.error.size() + 16;
  }
  std::size_t operator()(const ReplicateShard& m) const {
    return kHeader + (m.shard ? m.shard->wire_bytes() + kEntryBytes : 0);
  }
  std::size_t operator()(const IndexShard& m) const {
    return kHeader + kEntryBytes + m.entry.shard_id.size();
  }
  std::size_t operator()(const Ack&) const { return kHeader; }
  std::size_t operator()(const LookupIndexRequest& m) const {
    return kHeader + query_bytes(m.filter);
  }
  std::size_t operator()(const LookupIndexResponse& m) const {
    std::size_t n = kHeader;
    for (const auto& e : m.entries) n += kEntryBytes + e.shard_id.size();
    return n;
  }
  std::size_t operator()(const ExecSubQuery& m) const {
    // Shard ids travel as an explicit disjunction of equality terms.
    std::size_t n = kHeader + 64 + 24 * m.sub_query.field_predicates.size();
    for (const auto& id : m.sub_query.shard_ids) n += id.size() + 16;
    return n;
  }
  std::size_t operator()(const SubQueryResponse& m) const {
    std::size_t n = kHeader;
    for (const auto& r : m.result.rows) n += row_bytes(r);
    n += 48 * m.result.aggregates.size();
    return n;
  }
  std::size_t operator()(const Heartbeat&) const { return 0; }
  std::size_t operator()(const QueryRequest& m) const {
    return kHeader + query_bytes(m.query) + 16;
  }
  std::size_t operator()(const QueryResponse& m) const {
    std::size_t n = kHeader + m.error.size();
    for (const auto& r : m.rows) n += row_bytes(r);
    n += 48 * m.aggregates.size();
    for (const auto& id : m.unreachable_shards) n += id.size();
    return n;
  }
};

}  // namespace

std::size_t wire_size(const Payload& p) { return std::visit(Sizer{}, p); }

}  // namespace aerialdb
