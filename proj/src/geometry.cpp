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

#include "aerialdb/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "aerialdb/errors.hpp"

namespace aerialdb {

std::string to_string(EdgeId id) { return std::to_string(to_u32(id)); }

void BoundingBox::extend(GeoPoint p) noexcept {
  top_left.lat = std::max(top_left.lat, p.lat);
  top_left.lon = std::min(top_left.lon, p.lon);
  bottom_right.lat = std::min(bottom_right.lat, p.lat);
  bottom_right.lon = std::max(bottom_right.lon, p.lon);
}

bool bbox_intersects(const BoundingBox& a, const BoundingBox& b) noexcept {
  return a.south() <= b.north() && b.south() <= a.north() &&
         a.west() <= b.east() && b.west() <= a.east();
}

GeoPoint bbox_midpoint(const BoundingBox& b) noexcept {
  return {(b.top_left.lat + b.bottom_right.lat) / 2.0,
          (b.top_left.lon + b.bottom_right.lon) / 2.0};
}

std::optional<BoundingBox> bbox_intersection(const BoundingBox& a,
                                             const BoundingBox& b) noexcept {
  if (!bbox_intersects(a, b)) return std::nullopt;
  return BoundingBox::from_bounds(
      std::max(a.south(), b.south()), std::max(a.west(), b.west()),
      std::min(a.north(), b.north()), std::min(a.east(), b.east()));
}

namespace {

struct Vec2 {
  double x;  // lon
  double y;  // lat
};

Vec2 to_vec(GeoPoint p) { return {p.lon, p.lat}; }
GeoPoint to_point(Vec2 v) { return {v.y, v.x}; }

// Half-plane a*x + b*y <= c.
struct HalfPlane {
  double a, b, c;
  double eval(Vec2 p) const { return a * p.x + b * p.y - c; }
};

// Points at least as close to `s` as to `o`.
HalfPlane bisector(Vec2 s, Vec2 o) {
  return {2.0 * (o.x - s.x), 2.0 * (o.y - s.y),
          (o.x * o.x + o.y * o.y) - (s.x * s.x + s.y * s.y)};
}

std::vector<Vec2> clip(const std::vector<Vec2>& poly, const HalfPlane& h) {
  std::vector<Vec2> out;
  if (poly.empty()) return out;
  out.reserve(poly.size() + 1);
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& cur = poly[i];
    const Vec2& nxt = poly[(i + 1) % poly.size()];
    const double dc = h.eval(cur);
    const double dn = h.eval(nxt);
    if (dc <= 0.0) out.push_back(cur);
    if ((dc < 0.0 && dn > 0.0) || (dc > 0.0 && dn < 0.0)) {
      const double t = dc / (dc - dn);
      out.push_back({cur.x + t * (nxt.x - cur.x), cur.y + t * (nxt.y - cur.y)});
    }
  }
  // Drop consecutive duplicates produced by vertices lying on the line.
  std::vector<Vec2> dedup;
  dedup.reserve(out.size());
  for (const Vec2& v : out) {
    if (!dedup.empty() && std::abs(dedup.back().x - v.x) < 1e-15 &&
        std::abs(dedup.back().y - v.y) < 1e-15)
      continue;
    dedup.push_back(v);
  }
  if (dedup.size() > 1 && std::abs(dedup.front().x - dedup.back().x) < 1e-15 &&
      std::abs(dedup.front().y - dedup.back().y) < 1e-15)
    dedup.pop_back();
  return dedup;
}

// Signed distance of p from the directed edge a->b; positive on the left.
double edge_side(Vec2 a, Vec2 b, Vec2 p) {
  const double ex = b.x - a.x;
  const double ey = b.y - a.y;
  const double len = std::hypot(ex, ey);
  if (len == 0.0) return 0.0;
  return (ex * (p.y - a.y) - ey * (p.x - a.x)) / len;
}

bool cell_contains(const VoronoiCell& cell, GeoPoint p, double eps) {
  const auto& poly = cell.polygon;
  if (p.lat > cell.bounds.north() + eps || p.lat < cell.bounds.south() - eps ||
      p.lon < cell.bounds.west() - eps || p.lon > cell.bounds.east() + eps)
    return false;
  if (poly.size() < 3) return poly.size() == 1 && poly.front() == p;
  const Vec2 q = to_vec(p);
  for (std::size_t i = 0; i < poly.size(); ++i) {
    if (edge_side(to_vec(poly[i]), to_vec(poly[(i + 1) % poly.size()]), q) <
        -eps)
      return false;
  }
  return true;
}

void append_double(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

}  // namespace

VoronoiPartition VoronoiPartition::build(std::span<const Site> sites,
                                         const BoundingBox& region) {
  if (sites.empty())
    throw Error(Errc::invalid_argument, "voronoi: at least one site required");
  if (!region.valid())
    throw Error(Errc::invalid_argument, "voronoi: invalid region");

  std::vector<Site> sorted(sites.begin(), sites.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const Site& a, const Site& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i > 0 && sorted[i].id == sorted[i - 1].id)
      throw Error(Errc::duplicate_site,
                  "voronoi: duplicate edge id " + to_string(sorted[i].id));
    if (!region.contains(sorted[i].location))
      throw Error(Errc::site_outside_region,
                  "voronoi: site of edge " + to_string(sorted[i].id) +
                      " lies outside the region");
  }
  for (std::size_t i = 0; i < sorted.size(); ++i)
    for (std::size_t j = i + 1; j < sorted.size(); ++j)
      if (sorted[i].location == sorted[j].location)
        throw Error(Errc::duplicate_site,
                    "voronoi: edges " + to_string(sorted[i].id) + " and " +
                        to_string(sorted[j].id) + " share a site");

  VoronoiPartition part;
  part.region_ = region;
  const std::vector<Vec2> rect = {{region.west(), region.south()},
                                  {region.east(), region.south()},
                                  {region.east(), region.north()},
                                  {region.west(), region.north()}};
  part.cells_.reserve(sorted.size());
  for (const Site& s : sorted) {
    std::vector<Vec2> poly = rect;
    const Vec2 sv = to_vec(s.location);
    for (const Site& o : sorted) {
      if (o.id == s.id) continue;
      poly = clip(poly, bisector(sv, to_vec(o.location)));
    }
    VoronoiCell cell;
    cell.id = s.id;
    cell.site = s.location;
    cell.bounds = BoundingBox::point(s.location);
    for (const Vec2& v : poly) {
      cell.polygon.push_back(to_point(v));
      cell.bounds.extend(to_point(v));
    }
    part.cells_.push_back(std::move(cell));
  }
  return part;
}

EdgeId VoronoiPartition::locate(GeoPoint p) const {
  if (!region_.contains(p))
    throw Error(Errc::out_of_region, "locate: point outside region");
  // Cells are in ascending id order, so the first hit is the lowest id among
  // all cells whose closure (widened by epsilon) holds the point.
  for (const VoronoiCell& c : cells_)
    if (cell_contains(c, p, kBoundaryEpsilon)) return c.id;
  // Numerical fallback: nearest site, lowest id on ties.
  const VoronoiCell* best = nullptr;
  double best_d = 0.0;
  for (const VoronoiCell& c : cells_) {
    const double d = std::hypot(c.site.lat - p.lat, c.site.lon - p.lon);
    if (best == nullptr || d < best_d) {
      best = &c;
      best_d = d;
    }
  }
  return best->id;
}

const VoronoiCell& VoronoiPartition::cell(EdgeId id) const {
  auto it = std::lower_bound(
      cells_.begin(), cells_.end(), id,
      [](const VoronoiCell& c, EdgeId v) { return c.id < v; });
  if (it == cells_.end() || it->id != id)
    throw Error(Errc::invalid_argument, "no cell for edge " + to_string(id));
  return *it;
}

std::string VoronoiPartition::serialize() const {
  std::string out;
  for (const VoronoiCell& c : cells_) {
    out += to_string(c.id);
    for (const GeoPoint& v : c.polygon) {
      out += ' ';
      append_double(out, v.lat);
      out += ',';
      append_double(out, v.lon);
    }
    out += '\n';
  }
  return out;
}

VoronoiPartition build_voronoi(std::span<const Site> sites,
                               const BoundingBox& region) {
  return VoronoiPartition::build(sites, region);
}

EdgeId locate(const VoronoiPartition& partition, GeoPoint p) {
  return partition.locate(p);
}

double MetricFrame::metres_per_deg_lat() const noexcept { return 111320.0; }

double MetricFrame::metres_per_deg_lon() const noexcept {
  return 111320.0 * std::cos(ref_lat * std::numbers::pi / 180.0);
}

double MetricFrame::distance_m(GeoPoint a, GeoPoint b) const noexcept {
  return std::hypot((a.lat - b.lat) * metres_per_deg_lat(),
                    (a.lon - b.lon) * metres_per_deg_lon());
}

}  // namespace aerialdb
