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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "aerialdb/errors.hpp"
#include "aerialdb/index.hpp"
#include "aerialdb/model.hpp"
#include "aerialdb/rng.hpp"
#include "aerialdb/store.hpp"

namespace aerialdb {
namespace {

Shard make_shard(const std::string& id, Rng& rng, std::size_t n = 60,
                 Timestamp t0 = 0) {
  Shard s;
  s.shard_id = id;
  const double lat0 = 12.9 + uniform01(rng) * 0.1;
  const double lon0 = 77.5 + uniform01(rng) * 0.1;
  for (std::size_t i = 0; i < n; ++i) {
    Tuple t;
    t.shard_id = id;
    t.timestamp = t0 + static_cast<Timestamp>(i) * 5000;
    t.location = {lat0 + uniform01(rng) * 0.01, lon0 + uniform01(rng) * 0.01};
    t.fields["pm25"] = std::round(uniform01(rng) * 100);
    if (i % 3 != 0) t.fields["temperature"] = 20 + uniform01(rng) * 10;
    s.tuples.push_back(t);
  }
  s.fit_bounds();
  return s;
}

TEST(Codec, RoundTripIsBitExact) {
  Rng rng(1);
  Shard s = make_shard("rt", rng, 20);
  s.tuples[3].fields["odd"] = 0.1 + 0.2;
  s.tuples[4].fields["tiny"] = 5e-324;
  s.tuples[5].fields["neg"] = -1.0 / 3.0;
  const std::string text = encode_tuples(s.tuples);
  const auto back = decode_tuples(text, "rt");
  ASSERT_EQ(back, s.tuples);
  EXPECT_EQ(encode_tuples(back), text);
}

TEST(Codec, LineFormat) {
  Tuple t;
  t.timestamp = 1692057605000;
  t.location = {12.5, 77.25};
  t.fields["a"] = 1.5;
  t.fields["b"] = -2;
  EXPECT_EQ(encode_tuple(t), "1692057605000,12.5,77.25,a=1.5,b=-2");
}

TEST(Codec, RejectsMalformedLines) {
  EXPECT_THROW(decode_tuples("1,2\n", "x"), Error);
  EXPECT_THROW(decode_tuples("1,2,3,novalue\n", "x"), Error);
  EXPECT_THROW(decode_tuples("1,abc,3\n", "x"), Error);
  EXPECT_TRUE(decode_tuples("\n\n", "x").empty());
}

TEST(Payload, TightBoundsAndColumns) {
  Rng rng(2);
  const Shard s = make_shard("p", rng);
  const auto p = ShardPayload::from_shard(s);
  EXPECT_EQ(p->size(), 60u);
  EXPECT_EQ(p->bbox(), s.bbox);
  EXPECT_EQ(p->tuples_in_original_order(), s.tuples);
  const std::size_t temp = p->field_index("temperature");
  ASSERT_NE(temp, ShardPayload::npos);
  EXPECT_TRUE(std::isnan(p->value(0, temp)));
  EXPECT_EQ(p->field_index("nope"), ShardPayload::npos);
  // A 60-sample shard with three readings is about 17 kB on the wire.
  EXPECT_GT(p->wire_bytes(), 3000u);
}

SubQuery scoped(std::set<std::string> ids) {
  SubQuery sq;
  sq.shard_ids = std::move(ids);
  return sq;
}

TEST(Store, InsertThenCountAndIdempotence) {
  Rng rng(3);
  Store st;
  const Shard s = make_shard("s1", rng);
  st.insert_shard(s);
  EXPECT_EQ(st.execute(scoped({"s1"})).rows.size(), 60u);
  st.insert_shard(s);
  EXPECT_EQ(st.execute(scoped({"s1"})).rows.size(), 60u);
  EXPECT_EQ(st.shard_count(), 1u);
  EXPECT_EQ(st.tuple_count(), 60u);
}

TEST(Store, RejectsTupleOutsideBoundsAtomically) {
  Rng rng(4);
  Store st;
  Shard s = make_shard("bad", rng);
  s.tuples.back().location.lat = s.bbox.north() + 0.5;
  try {
    st.insert_shard(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_shard);
  }
  EXPECT_EQ(st.shard_count(), 0u);
  Shard late = make_shard("late", rng);
  late.tuples[0].timestamp = late.range.end + 1;
  EXPECT_THROW(st.insert_shard(late), Error);
  Shard wrong = make_shard("w", rng);
  wrong.tuples[1].shard_id = "other";
  EXPECT_THROW(st.insert_shard(wrong), Error);
  EXPECT_EQ(st.tuple_count(), 0u);
}

TEST(Store, TimeFilterExcludingEverythingIsEmpty) {
  Rng rng(5);
  Store st;
  st.insert_shard(make_shard("s1", rng));
  SubQuery sq = scoped({"s1"});
  sq.time = TimeRange{1'000'000, 2'000'000};
  EXPECT_TRUE(st.execute(sq).rows.empty());
}

TEST(Store, ScopingIgnoresCoResidentShards) {
  Rng rng(6);
  Store st;
  st.insert_shard(make_shard("a", rng));
  st.insert_shard(make_shard("b", rng));
  const auto r = st.execute(scoped({"a", "missing"}));
  EXPECT_EQ(r.rows.size(), 60u);
  for (const auto& row : r.rows) EXPECT_EQ(row.tuple.shard_id, "a");
}

// Independent full-scan filter.
std::vector<ResultRow> naive(const std::vector<Shard>& shards, const SubQuery& sq) {
  std::vector<ResultRow> out;
  for (const Shard& s : shards) {
    if (!sq.shard_ids.contains(s.shard_id)) continue;
    for (std::uint32_t i = 0; i < s.tuples.size(); ++i) {
      const Tuple& t = s.tuples[i];
      if (sq.time && (t.timestamp < sq.time->start || t.timestamp > sq.time->end))
        continue;
      if (sq.bbox && !sq.bbox->contains(t.location)) continue;
      bool ok = true;
      for (const auto& p : sq.field_predicates) {
        auto it = t.fields.find(p.field);
        if (it == t.fields.end() || !p.test(it->second)) ok = false;
      }
      if (ok) out.push_back({t, i});
    }
  }
  std::sort(out.begin(), out.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.tuple.timestamp, a.tuple.shard_id, a.ordinal) <
           std::tie(b.tuple.timestamp, b.tuple.shard_id, b.ordinal);
  });
  return out;
}

TEST(Store, RandomQueriesMatchFullScan) {
  Rng rng(7);
  std::vector<Shard> shards;
  Store st;
  for (int i = 0; i < 150; ++i) {
    shards.push_back(make_shard("s" + std::to_string(i), rng, 60,
                                static_cast<Timestamp>(uniform_index(rng, 10)) * 100'000));
    st.insert_shard(shards.back());
  }
  const Comparator ops[] = {Comparator::lt, Comparator::le, Comparator::eq,
                            Comparator::ge, Comparator::gt};
  for (int k = 0; k < 400; ++k) {
    SubQuery sq;
    for (const Shard& s : shards)
      if (uniform01(rng) < 0.3) sq.shard_ids.insert(s.shard_id);
    if (k & 1) {
      const Timestamp a = static_cast<Timestamp>(uniform_index(rng, 1'200'000));
      sq.time = TimeRange{a, a + static_cast<Timestamp>(uniform_index(rng, 400'000))};
    }
    if (k & 2) {
      const double s = 12.9 + uniform01(rng) * 0.1, w = 77.5 + uniform01(rng) * 0.1;
      sq.bbox = BoundingBox::from_bounds(s, w, s + 0.02, w + 0.02);
    }
    if (k & 4)
      sq.field_predicates.push_back(
          {"pm25", ops[uniform_index(rng, 5)], std::round(uniform01(rng) * 100)});
    if (k & 8) sq.field_predicates.push_back({"temperature", Comparator::ge, 25});
    if (k % 37 == 0) sq.field_predicates.push_back({"absent", Comparator::lt, 1e9});
    ASSERT_EQ(st.execute(sq).rows, naive(shards, sq)) << "query " << k;
  }
}

TEST(Store, CountAggregationPerShard) {
  Rng rng(8);
  std::vector<Shard> shards = {make_shard("s1", rng), make_shard("s2", rng)};
  Store st;
  for (const auto& s : shards) st.insert_shard(s);
  SubQuery sq = scoped({"s1", "s2"});
  sq.field_predicates.push_back({"pm25", Comparator::gt, 40});
  sq.aggregation = Aggregation{AggregateFn::count, "pm25"};
  const auto r = st.execute(sq);
  ASSERT_EQ(r.aggregates.size(), 2u);
  SubQuery plain = sq;
  plain.aggregation.reset();
  for (const auto& agg : r.aggregates) {
    SubQuery one = plain;
    one.shard_ids = {agg.shard_id};
    const auto rows = naive(shards, one);
    EXPECT_EQ(agg.count, rows.size());
    EXPECT_DOUBLE_EQ(agg.value, static_cast<double>(rows.size()));
  }
}

TEST(Store, MinMaxMeanSumAggregations) {
  Rng rng(9);
  const Shard s = make_shard("s1", rng);
  Store st;
  st.insert_shard(s);
  double mn = 1e300, mx = -1e300, sum = 0;
  for (const auto& t : s.tuples) {
    const double v = t.fields.at("pm25");
    mn = std::min(mn, v);
    mx = std::max(mx, v);
    sum += v;
  }
  const std::pair<AggregateFn, double> cases[] = {
      {AggregateFn::min, mn}, {AggregateFn::max, mx},
      {AggregateFn::sum, sum}, {AggregateFn::mean, sum / 60}};
  for (const auto& [fn, want] : cases) {
    SubQuery sq = scoped({"s1"});
    sq.aggregation = Aggregation{fn, "pm25"};
    const auto r = st.execute(sq);
    ASSERT_EQ(r.aggregates.size(), 1u);
    EXPECT_NEAR(r.aggregates[0].value, want, 1e-9) << to_string(fn);
  }
}

TEST(Store, BatchGroupCounts) {
  EXPECT_EQ(Store::batch_count(149, 150), 1u);
  EXPECT_EQ(Store::batch_count(150, 150), 1u);
  EXPECT_EQ(Store::batch_count(151, 150), 2u);
  EXPECT_EQ(Store::batch_count(300, 150), 2u);
  EXPECT_EQ(Store::batch_count(1000, 150), 7u);
  EXPECT_THROW(Store::batch_count(10, 0), Error);
}

TEST(Store, BatchedEqualsUnbatched) {
  Rng rng(10);
  Store st;
  SubQuery sq;
  for (int i = 0; i < 320; ++i) {
    const std::string id = "b" + std::to_string(i);
    st.insert_shard(make_shard(id, rng, 8, static_cast<Timestamp>(i % 7) * 1000));
    sq.shard_ids.insert(id);
  }
  sq.field_predicates.push_back({"pm25", Comparator::le, 60});
  const auto want = st.execute(sq);
  for (std::size_t b : {1u, 149u, 150u, 151u, 300u, 1000u}) {
    const auto got = st.batch_execute(sq, b);
    EXPECT_EQ(got.rows, want.rows) << b;
  }
  sq.aggregation = Aggregation{AggregateFn::mean, "pm25"};
  EXPECT_EQ(st.batch_execute(sq, 7).aggregates, st.execute(sq).aggregates);
}

ShardIndexEntry random_entry(Rng& rng, int i) {
  ShardIndexEntry e;
  e.shard_id = "e" + std::to_string(i);
  const double s = 12.9 + uniform01(rng) * 0.18, w = 77.46 + uniform01(rng) * 0.23;
  e.bbox = BoundingBox::from_bounds(s, w, s + uniform01(rng) * 0.01,
                                    w + uniform01(rng) * 0.01);
  const Timestamp t = static_cast<Timestamp>(uniform_index(rng, 10'000'000));
  e.range = {t, t + static_cast<Timestamp>(uniform_index(rng, 600'000))};
  e.replicas = {edge_id(0), edge_id(1), edge_id(2)};
  return e;
}

std::vector<std::string> ids(std::vector<ShardIndexEntry> v) {
  std::vector<std::string> out;
  for (auto& e : v) out.push_back(e.shard_id);
  std::sort(out.begin(), out.end());
  return out;
}

TEST(Index, EmptyAndBasicLookups) {
  ShardIndex idx(0.005, {12.9, 77.46});
  EXPECT_TRUE(idx.lookup_spatial(BoundingBox::from_bounds(12.9, 77.5, 13, 77.6)).empty());
  EXPECT_TRUE(idx.lookup_temporal({0, 100}).empty());
  EXPECT_FALSE(idx.lookup_id("x"));
  Rng rng(1);
  ShardIndexEntry e = random_entry(rng, 0);
  idx.add(e);
  idx.add(e);
  EXPECT_EQ(idx.size(), 1u);
  EXPECT_EQ(idx.lookup_id(e.shard_id), e);
  // Corner contact counts.
  EXPECT_EQ(idx.lookup_spatial(BoundingBox::point(e.bbox.top_left)).size(), 1u);
  EXPECT_EQ(idx.lookup_temporal({e.range.end, e.range.end + 5}).size(), 1u);
  EXPECT_TRUE(idx.lookup_temporal({e.range.end + 1, e.range.end + 5}).empty());
}

TEST(Index, ReplaceMovesEntry) {
  ShardIndex idx(0.005, {12.9, 77.46});
  Rng rng(2);
  ShardIndexEntry e = random_entry(rng, 0);
  idx.add(e);
  const BoundingBox old = e.bbox;
  const TimeRange old_range = e.range;
  e.bbox = BoundingBox::from_bounds(13.0, 77.6, 13.001, 77.601);
  e.range = {old_range.end + 1'000'000, old_range.end + 1'000'010};
  idx.add(e);
  EXPECT_TRUE(idx.lookup_spatial(old).empty());
  EXPECT_TRUE(idx.lookup_temporal(old_range).empty());
  EXPECT_EQ(idx.lookup_spatial(e.bbox).size(), 1u);
}

TEST(Index, RandomLookupsMatchLinearScan) {
  ShardIndex idx(0.005, {12.9, 77.46});
  Rng rng(3);
  std::vector<ShardIndexEntry> all;
  for (int i = 0; i < 10'000; ++i) {
    all.push_back(random_entry(rng, i));
    idx.add(all.back());
  }
  EXPECT_EQ(idx.size(), 10'000u);
  for (int k = 0; k < 1000; ++k) {
    const ShardIndexEntry q = random_entry(rng, -1);
    std::vector<std::string> sp, tm;
    for (const auto& e : all) {
      if (bbox_intersects(e.bbox, q.bbox)) sp.push_back(e.shard_id);
      if (e.range.intersects(q.range)) tm.push_back(e.shard_id);
    }
    std::sort(sp.begin(), sp.end());
    std::sort(tm.begin(), tm.end());
    ASSERT_EQ(ids(idx.lookup_spatial(q.bbox)), sp);
    ASSERT_EQ(ids(idx.lookup_temporal(q.range)), tm);
  }
}

}  // namespace
}  // namespace aerialdb
