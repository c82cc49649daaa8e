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

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "aerialdb/errors.hpp"
#include "aerialdb/hashing.hpp"
#include "aerialdb/rng.hpp"
#include "aerialdb/workload.hpp"
#include "aerialdb/xxhash64.hpp"

namespace aerialdb {
namespace {

// Reference values computed with the python-xxhash package.
TEST(Xxh64, StringVectors) {
  EXPECT_EQ(xxh64(""), 0xef46db3751d8e999ULL);
  EXPECT_EQ(xxh64("a"), 0xd24ec4f1a98c6e5bULL);
  EXPECT_EQ(xxh64("abc"), 0x44bc2cf5ad770999ULL);
  EXPECT_EQ(xxh64("s-0001"), 0xc6159c7c3d896ba2ULL);
  const std::string fox = "The quick brown fox jumps over the lazy dog";
  EXPECT_EQ(xxh64(fox), 0x0b242d361fda71bcULL);
  EXPECT_EQ(xxh64(fox, 42), 0xaa9f288a8baa3d3fULL);
}

TEST(Xxh64, LongInputCrossesStripes) {
  std::string buf;
  for (int rep = 0; rep < 3; ++rep)
    for (int i = 0; i < 256; ++i) buf.push_back(static_cast<char>(i));
  EXPECT_EQ(xxh64(buf), 0x8e03c838c596036fULL);
  EXPECT_EQ(xxh64(buf, 0x9E3779B97F4A7C15ULL), 0x919e1c789d522e91ULL);
}

TEST(Xxh64, IntegersHashAsLittleEndianBytes) {
  EXPECT_EQ(xxh64_int(0), 0x34c96acdcadb1bbbULL);
  EXPECT_EQ(xxh64_int(1), 0x9f29cb17a2a49995ULL);
  EXPECT_EQ(xxh64_int(5637), 0xb1d55c5633913f0fULL);
  EXPECT_EQ(xxh64_int(-1), 0x85d136adb773c6c9ULL);
  EXPECT_EQ(xxh64_int(std::int64_t{1} << 40), 0xa13ea4c7924fd453ULL);
}

HashConfig config(std::size_t n, std::uint64_t seed = 0) {
  HashConfig cfg;
  for (std::uint32_t i = 0; i < n; ++i) cfg.edge_ids.push_back(edge_id(i));
  cfg.hash_seed = seed;
  cfg.epoch_origin = 1'000'000;
  cfg.grid_origin = {12.0, 77.0};
  return cfg;
}

TEST(HashId, SingleEdgeAlwaysWins) {
  HashConfig cfg = config(0);
  cfg.edge_ids = {edge_id(17)};
  for (const char* id : {"a", "s-0001", "zzz"})
    EXPECT_EQ(hash_id(id, cfg), edge_id(17));
}

TEST(HashId, GoldenVectors) {
  const HashConfig cfg = config(20);
  EXPECT_EQ(hash_id("s-0001", cfg), edge_id(6));
  const std::vector<std::uint32_t> want = {7, 11, 13, 19, 9};
  for (std::size_t i = 0; i < want.size(); ++i)
    EXPECT_EQ(hash_id("shard-" + std::to_string(i), cfg), edge_id(want[i]));
}

TEST(HashId, IndexesIntoSortedEdgeList) {
  HashConfig cfg;
  for (std::uint32_t i = 0; i < 20; ++i) cfg.edge_ids.push_back(edge_id(100 + 3 * i));
  EXPECT_EQ(hash_id("s-0001", cfg), edge_id(100 + 3 * 6));
}

TEST(HashTemporal, BucketArithmetic) {
  const HashConfig cfg = config(20);
  const Timestamp e = cfg.epoch_origin;
  EXPECT_EQ(bucket_of(e, cfg), 0);
  EXPECT_EQ(bucket_of(e + 299'999, cfg), 0);
  EXPECT_EQ(bucket_of(e + 300'000, cfg), 1);
  EXPECT_EQ(hash_temporal(e, cfg), edge_id(19));
  EXPECT_EQ(hash_temporal(e + 299'000, cfg), edge_id(19));
  EXPECT_EQ(hash_temporal(e + 300'000, cfg), edge_id(9));
  EXPECT_EQ(hash_bucket(5637, cfg), edge_id(7));
  EXPECT_EQ(hash_bucket(-1, cfg), edge_id(1));
}

TEST(HashTemporal, SeededGolden) {
  const HashConfig cfg = config(80, 7);
  EXPECT_EQ(hash_bucket(0, cfg), edge_id(23));
  EXPECT_EQ(hash_bucket(1, cfg), edge_id(40));
  EXPECT_EQ(hash_bucket(5637, cfg), edge_id(61));
  EXPECT_EQ(hash_bucket(std::int64_t{1} << 40, cfg), edge_id(55));
}

TEST(HashTemporal, BeforeEpochIsRejected) {
  const HashConfig cfg = config(20);
  try {
    hash_temporal(cfg.epoch_origin - 1, cfg);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::before_epoch);
  }
}

TEST(HashId, SpreadsUniformly) {
  const HashConfig cfg = config(20);
  Rng rng(5);
  std::map<EdgeId, int> counts;
  const int n = 20'000;
  for (int i = 0; i < n; ++i) ++counts[hash_id(make_uuid(rng), cfg)];
  ASSERT_EQ(counts.size(), 20u);
  for (const auto& [e, c] : counts) {
    EXPECT_GE(c, 0.8 * n / 20) << to_string(e);
    EXPECT_LE(c, 1.2 * n / 20) << to_string(e);
  }
}

TEST(HashConfig, ValidateRejectsBadConfigs) {
  HashConfig cfg = config(3);
  EXPECT_NO_THROW(cfg.validate());
  HashConfig unsorted = cfg;
  unsorted.edge_ids = {edge_id(2), edge_id(1)};
  EXPECT_THROW(unsorted.validate(), Error);
  HashConfig empty = cfg;
  empty.edge_ids.clear();
  EXPECT_THROW(empty.validate(), Error);
  HashConfig tau = cfg;
  tau.tau_seconds = 0;
  EXPECT_THROW(tau.validate(), Error);
  HashConfig sigma = cfg;
  sigma.sigma_degrees = -1;
  EXPECT_THROW(sigma.validate(), Error);
}

}  // namespace
}  // namespace aerialdb
