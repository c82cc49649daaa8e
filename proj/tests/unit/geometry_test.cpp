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
#include <vector>

#include "aerialdb/errors.hpp"
#include "aerialdb/geometry.hpp"
#include "aerialdb/hashing.hpp"
#include "aerialdb/rng.hpp"
#include "aerialdb/workload.hpp"

namespace aerialdb {
namespace {

const BoundingBox kSquare = BoundingBox::from_bounds(-2, -2, 2, 2);
const BoundingBox kCity{{13.08, 77.46}, {12.90, 77.69}};

EdgeId brute_nearest(const std::vector<Site>& sites, GeoPoint p) {
  EdgeId best{};
  double best_d = std::numeric_limits<double>::infinity();
  for (const Site& s : sites) {
    const double d = std::hypot(s.location.lat - p.lat, s.location.lon - p.lon);
    if (d < best_d) {
      best_d = d;
      best = s.id;
    }
  }
  return best;
}

double second_gap(const std::vector<Site>& sites, GeoPoint p) {
  std::vector<double> d;
  for (const Site& s : sites)
    d.push_back(std::hypot(s.location.lat - p.lat, s.location.lon - p.lon));
  std::sort(d.begin(), d.end());
  return d.size() < 2 ? 1.0 : d[1] - d[0];
}

TEST(BoundingBox, IntersectsIsClosed) {
  const auto a = BoundingBox::from_bounds(0, 0, 1, 1);
  EXPECT_TRUE(bbox_intersects(a, a));
  EXPECT_TRUE(bbox_intersects(a, BoundingBox::from_bounds(1, 0, 2, 1)));
  EXPECT_TRUE(bbox_intersects(a, BoundingBox::from_bounds(1, 1, 2, 2)));
  EXPECT_FALSE(bbox_intersects(a, BoundingBox::from_bounds(1.5, 0, 2, 1)));
  EXPECT_FALSE(bbox_intersects(a, BoundingBox::from_bounds(0, 1.01, 1, 2)));
}

TEST(BoundingBox, Midpoint) {
  const GeoPoint m = bbox_midpoint(BoundingBox{{2, 0}, {0, 2}});
  EXPECT_DOUBLE_EQ(m.lat, 1);
  EXPECT_DOUBLE_EQ(m.lon, 1);
  const GeoPoint p{12.5, 77.5};
  EXPECT_EQ(bbox_midpoint(BoundingBox::point(p)), p);
  const GeoPoint c = bbox_midpoint(BoundingBox{{12.97, 77.56}, {12.93, 77.60}});
  EXPECT_NEAR(c.lat, 12.95, 1e-12);
  EXPECT_NEAR(c.lon, 77.58, 1e-12);
}

TEST(BoundingBox, Intersection) {
  const auto a = BoundingBox::from_bounds(0, 0, 2, 2);
  const auto b = BoundingBox::from_bounds(1, 1, 3, 3);
  EXPECT_EQ(bbox_intersection(a, b), BoundingBox::from_bounds(1, 1, 2, 2));
  EXPECT_FALSE(bbox_intersection(a, BoundingBox::from_bounds(5, 5, 6, 6)));
}

TEST(Voronoi, SingleSiteCoversRegion) {
  const std::vector<Site> sites = {{edge_id(4), {0.3, -1.2}}};
  const auto part = build_voronoi(sites, kSquare);
  ASSERT_EQ(part.cells().size(), 1u);
  EXPECT_EQ(part.cells()[0].bounds, kSquare);
  EXPECT_EQ(part.cells()[0].polygon.size(), 4u);
  EXPECT_EQ(locate(part, {-2, 2}), edge_id(4));
  EXPECT_EQ(locate(part, {1.9, -1.9}), edge_id(4));
}

TEST(Voronoi, TwoSitesSplitOnBisector) {
  const std::vector<Site> sites = {{edge_id(1), {0, -1}}, {edge_id(2), {0, 1}}};
  const auto part = build_voronoi(sites, kSquare);
  EXPECT_EQ(locate(part, {0.5, -0.5}), edge_id(1));
  EXPECT_EQ(locate(part, {0.5, 0.5}), edge_id(2));
  // On the bisector the lower id wins.
  EXPECT_EQ(locate(part, {1.0, 0.0}), edge_id(1));
  EXPECT_EQ(locate(part, {-1.0, 1e-12}), edge_id(1));
  EXPECT_NEAR(part.cell(edge_id(1)).bounds.east(), 0.0, 1e-12);
  EXPECT_NEAR(part.cell(edge_id(2)).bounds.west(), 0.0, 1e-12);
}

TEST(Voronoi, TieRuleUsesLowestIdNotInsertionOrder) {
  const std::vector<Site> sites = {{edge_id(9), {0, -1}}, {edge_id(3), {0, 1}}};
  const auto part = build_voronoi(sites, kSquare);
  EXPECT_EQ(locate(part, {0.7, 0.0}), edge_id(3));
}

TEST(Voronoi, RejectsDuplicateAndOutsideSites) {
  const std::vector<Site> dup = {{edge_id(1), {0, 0}}, {edge_id(2), {0, 0}}};
  try {
    build_voronoi(dup, kSquare);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::duplicate_site);
  }
  const std::vector<Site> out = {{edge_id(1), {3, 0}}};
  try {
    build_voronoi(out, kSquare);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::site_outside_region);
  }
  EXPECT_THROW(build_voronoi(std::vector<Site>{}, kSquare), Error);
}

TEST(Voronoi, LocateOutsideRegionThrows) {
  const std::vector<Site> sites = {{edge_id(1), {0, 0}}};
  const auto part = build_voronoi(sites, kSquare);
  try {
    locate(part, {2.5, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::out_of_region);
  }
}

TEST(Voronoi, TwentySitesMatchBruteForceOnGrid) {
  const auto sites = lattice_sites(kCity, 20, 11);
  const auto part = build_voronoi(sites, kCity);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    for (int j = 0; j < 200; ++j) {
      const GeoPoint p{kCity.south() + (kCity.north() - kCity.south()) * i / 199.0,
                       kCity.west() + (kCity.east() - kCity.west()) * j / 199.0};
      if (second_gap(sites, p) < 1e-9) continue;
      ASSERT_EQ(locate(part, p), brute_nearest(sites, p)) << p.lat << "," << p.lon;
      ++checked;
    }
  }
  EXPECT_GT(checked, 39'000);
}

TEST(Voronoi, RandomSiteSetsMatchBruteForce) {
  Rng rng(3);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 63);
    std::vector<Site> sites;
    for (std::uint32_t i = 0; i < n; ++i)
      sites.push_back({edge_id(i * 7 + 1),
                       {kCity.south() + uniform01(rng) * 0.18,
                        kCity.west() + uniform01(rng) * 0.23}});
    const auto part = build_voronoi(sites, kCity);
    for (int k = 0; k < 10'000; ++k) {
      const GeoPoint p{kCity.south() + uniform01(rng) * 0.18,
                       kCity.west() + uniform01(rng) * 0.23};
      if (second_gap(sites, p) < 1e-9) continue;
      ASSERT_EQ(locate(part, p), brute_nearest(sites, p));
    }
  }
}

TEST(Voronoi, CellsContainSitesAndSerializeDeterministically) {
  const auto sites = lattice_sites(kCity, 20, 11);
  const auto a = build_voronoi(sites, kCity);
  const auto b = build_voronoi(sites, kCity);
  EXPECT_EQ(a.serialize(), b.serialize());
  for (const auto& c : a.cells()) {
    EXPECT_TRUE(c.bounds.contains(c.site));
    EXPECT_GE(c.polygon.size(), 3u);
    EXPECT_EQ(a.locate(c.site), c.id);
  }
  // First token of each line is the edge id, in ascending order.
  const std::string text = a.serialize();
  EXPECT_EQ(text.substr(0, text.find(' ')), to_string(a.cells()[0].id));
}

TEST(Voronoi, CellAreasSumToRegion) {
  const auto sites = lattice_sites(kCity, 20, 11);
  const auto part = build_voronoi(sites, kCity);
  double total = 0;
  for (const auto& c : part.cells()) {
    double a = 0;
    for (std::size_t i = 0; i < c.polygon.size(); ++i) {
      const auto& p = c.polygon[i];
      const auto& q = c.polygon[(i + 1) % c.polygon.size()];
      a += p.lon * q.lat - q.lon * p.lat;
    }
    EXPECT_GT(a, 0) << "polygon must be counter-clockwise";
    total += a / 2;
  }
  const double region = (kCity.north() - kCity.south()) * (kCity.east() - kCity.west());
  EXPECT_NEAR(total, region, 1e-9);
}

HashConfig grid_config() {
  HashConfig cfg;
  cfg.sigma_degrees = 0.005;
  cfg.grid_origin = {kCity.south(), kCity.west()};
  cfg.epoch_origin = 0;
  for (std::uint32_t i = 0; i < 20; ++i) cfg.edge_ids.push_back(edge_id(i));
  return cfg;
}

TEST(Slicing, BoxInsideOneCellIsSingleton) {
  const HashConfig cfg = grid_config();
  const auto b = BoundingBox::from_bounds(12.9001, 77.4601, 12.9040, 77.4640);
  const auto cells = slice_bbox(b, cfg);
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0], (GridCell{0, 0}));
}

TEST(Slicing, HalfOpenTimeBuckets) {
  const HashConfig cfg = grid_config();
  const auto two = slice_range({0, 2 * cfg.tau_ms() - 1}, cfg);
  EXPECT_EQ(two, (std::vector<std::int64_t>{0, 1}));
  const auto three = slice_range({0, 2 * cfg.tau_ms()}, cfg);
  EXPECT_EQ(three, (std::vector<std::int64_t>{0, 1, 2}));
  EXPECT_EQ(slice_range({5, 5}, cfg), (std::vector<std::int64_t>{0}));
}

TEST(Slicing, TwoByThreeMatchesBruteForce) {
  const HashConfig cfg = grid_config();
  const auto b = BoundingBox::from_bounds(12.9502, 77.5012, 12.9597, 77.5143);
  const auto cells = slice_bbox(b, cfg);
  std::vector<GridCell> brute;
  for (std::int64_t r = 0; r < 40; ++r)
    for (std::int64_t c = 0; c < 50; ++c)
      if (bbox_intersects(cell_bounds({r, c}, cfg), b)) brute.push_back({r, c});
  EXPECT_EQ(cells.size(), 6u);
  EXPECT_EQ(cells, brute);
}

TEST(Slicing, RandomBoxesMatchBruteForce) {
  const HashConfig cfg = grid_config();
  Rng rng(17);
  for (int k = 0; k < 300; ++k) {
    const double s = 12.9 + uniform01(rng) * 0.15, w = 77.46 + uniform01(rng) * 0.2;
    const auto b = BoundingBox::from_bounds(s, w, s + uniform01(rng) * 0.03,
                                            w + uniform01(rng) * 0.03);
    std::vector<GridCell> brute;
    for (std::int64_t r = -1; r < 42; ++r)
      for (std::int64_t c = -1; c < 52; ++c)
        if (bbox_intersects(cell_bounds({r, c}, cfg), b)) brute.push_back({r, c});
    ASSERT_EQ(slice_bbox(b, cfg), brute);
  }
}

TEST(Slicing, GridIsGlobalNotPerBox) {
  const HashConfig cfg = grid_config();
  // Two overlapping boxes anchored differently land on common cells.
  const auto a = BoundingBox::from_bounds(12.9512, 77.5012, 12.9533, 77.5033);
  const auto b = BoundingBox::from_bounds(12.9530, 77.5030, 12.9560, 77.5070);
  const auto ca = slice_bbox(a, cfg);
  const auto cb = slice_bbox(b, cfg);
  std::vector<GridCell> common;
  std::set_intersection(ca.begin(), ca.end(), cb.begin(), cb.end(),
                        std::back_inserter(common));
  EXPECT_FALSE(common.empty());
}

TEST(IndexTargets, SingleSliceGivesReplicaEdges) {
  const HashConfig cfg = grid_config();
  const auto part = build_voronoi(lattice_sites(kCity, 20, 11), kCity);
  // Shard confined to one cell and one bucket.
  ShardIndexEntry e;
  e.shard_id = "one-slice";
  e.bbox = BoundingBox::from_bounds(12.9501, 77.5001, 12.9502, 77.5002);
  e.range = {1000, 2000};
  const GridCell cell = cell_of(bbox_midpoint(e.bbox), cfg);
  const EdgeId spatial = part.locate(cell_representative(cell, cfg, kCity));
  e.replicas = {spatial, hash_temporal(e.range.midpoint(), cfg),
                hash_id(e.shard_id, cfg)};
  const auto t = index_edges_for(e, cfg, part);
  EXPECT_EQ(t.spatial, EdgeSet{e.replicas[0]});
  EXPECT_EQ(t.temporal, EdgeSet{e.replicas[1]});
  EXPECT_EQ(t.id, e.replicas[2]);
}

TEST(IndexTargets, MultiBucketBoundAndReplicaUnion) {
  const HashConfig cfg = grid_config();
  const auto part = build_voronoi(lattice_sites(kCity, 20, 11), kCity);
  ShardIndexEntry e;
  e.shard_id = "multi";
  e.bbox = BoundingBox::from_bounds(12.95, 77.50, 12.962, 77.516);
  e.range = {0, 3 * cfg.tau_ms() - 1};
  e.replicas = {edge_id(0), edge_id(1), edge_id(2)};
  const auto t = index_edges_for(e, cfg, part);
  const std::size_t k = slice_range(e.range, cfg).size();
  EXPECT_EQ(k, 3u);
  EXPECT_LE(t.temporal.size(), k + 1);
  EXPECT_TRUE(t.temporal.contains(edge_id(1)));
  EXPECT_TRUE(t.spatial.contains(edge_id(0)));
  const EdgeSet all = t.all(e);
  for (EdgeId r : e.replicas) EXPECT_TRUE(all.contains(r));
  EXPECT_GE(all.size(), 3u);
}

}  // namespace
}  // namespace aerialdb
