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

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aerialdb/types.hpp"

namespace aerialdb {

/// WGS-84 coordinate, treated as a point in the (lon, lat) plane.
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  bool valid() const noexcept {
    return lat >= -90.0 && lat <= 90.0 && lon >= -180.0 && lon <= 180.0;
  }

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Axis-aligned box given by its north-west and south-east corners. Boxes are
/// closed; a box may collapse to a segment or a single point.
struct BoundingBox {
  GeoPoint top_left;
  GeoPoint bottom_right;

  static BoundingBox from_bounds(double south, double west, double north,
                                 double east) {
    return BoundingBox{{north, west}, {south, east}};
  }
  static BoundingBox point(GeoPoint p) { return BoundingBox{p, p}; }

  double north() const noexcept { return top_left.lat; }
  double south() const noexcept { return bottom_right.lat; }
  double west() const noexcept { return top_left.lon; }
  double east() const noexcept { return bottom_right.lon; }

  bool valid() const noexcept {
    return top_left.valid() && bottom_right.valid() &&
           top_left.lat >= bottom_right.lat && top_left.lon <= bottom_right.lon;
  }
  bool contains(GeoPoint p) const noexcept {
    return p.lat <= north() && p.lat >= south() && p.lon >= west() &&
           p.lon <= east();
  }
  bool contains(const BoundingBox& b) const noexcept {
    return contains(b.top_left) && contains(b.bottom_right);
  }

  /// Smallest box covering this one and `p`.
  void extend(GeoPoint p) noexcept;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

bool bbox_intersects(const BoundingBox& a, const BoundingBox& b) noexcept;
GeoPoint bbox_midpoint(const BoundingBox& b) noexcept;
std::optional<BoundingBox> bbox_intersection(const BoundingBox& a,
                                             const BoundingBox& b) noexcept;

struct Site {
  EdgeId id{};
  GeoPoint location;
};

struct VoronoiCell {
  EdgeId id{};
  GeoPoint site;
  /// Convex polygon, counter-clockwise in the (lon, lat) plane.
  std::vector<GeoPoint> polygon;
  BoundingBox bounds;
};

/// Voronoi tessellation of a rectangular region over a fixed set of sites,
/// with every cell clipped to the region. Immutable once built.
class VoronoiPartition {
 public:
  /// Points closer than this (in degrees) to a cell boundary count as lying
  /// on the boundary; such points resolve to the lowest adjacent edge id.
  static constexpr double kBoundaryEpsilon = 1e-9;

  static VoronoiPartition build(std::span<const Site> sites,
                                const BoundingBox& region);

  /// Edge whose cell contains `p`. Throws Errc::out_of_region.
  EdgeId locate(GeoPoint p) const;

  const BoundingBox& region() const noexcept { return region_; }
  /// Cells sorted by ascending edge id.
  const std::vector<VoronoiCell>& cells() const noexcept { return cells_; }
  const VoronoiCell& cell(EdgeId id) const;

  /// One line per cell: `<edge id> <lat>,<lon> <lat>,<lon> ...`.
  std::string serialize() const;

 private:
  BoundingBox region_;
  std::vector<VoronoiCell> cells_;
};

VoronoiPartition build_voronoi(std::span<const Site> sites,
                               const BoundingBox& region);
EdgeId locate(const VoronoiPartition& partition, GeoPoint p);

/// Local metric frame for converting between metres and degrees near a
/// reference latitude (equirectangular approximation).
struct MetricFrame {
  double ref_lat = 0.0;

  double metres_per_deg_lat() const noexcept;
  double metres_per_deg_lon() const noexcept;
  double distance_m(GeoPoint a, GeoPoint b) const noexcept;
};

}  // namespace aerialdb
