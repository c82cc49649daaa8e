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

#include "aerialdb/workload.hpp"

#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "aerialdb/errors.hpp"

namespace aerialdb {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' ||
                               line[i] == '\r')) {
      ++i;
    }
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' &&
           line[j] != '\r') {
      ++j;
    }
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
T parse_num(std::string_view s, std::size_t line_no) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw Error(Errc::parse_error, "line " + std::to_string(line_no) +
                                       ": bad number '" + std::string(s) + "'");
  }
  return v;
}

// Lines with comments stripped, paired with 1-based line numbers.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    auto tokens = split_ws(line);
    if (!tokens.empty()) fn(tokens, line_no);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::parse_error, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

// ---- road graph ---------------------------------------------------------

std::uint32_t RoadGraph::add_node(GeoPoint p) {
  nodes_.push_back(p);
  adj_.emplace_back();
  return static_cast<std::uint32_t>(nodes_.size() - 1);
}

void RoadGraph::add_street(std::uint32_t a, std::uint32_t b) {
  if (a >= nodes_.size() || b >= nodes_.size() || a == b) {
    throw Error(Errc::invalid_argument, "street endpoints must be two nodes");
  }
  const GeoPoint pa = nodes_[a];
  const GeoPoint pb = nodes_[b];
  const double len =
      MetricFrame{(pa.lat + pb.lat) / 2}.distance_m(pa, pb);
  if (!(len > 0)) {
    throw Error(Errc::invalid_argument, "street has zero length");
  }
  adj_[a].push_back({b, len});
  adj_[b].push_back({a, len});
}

RoadGraph RoadGraph::grid(const BoundingBox& region, int rows, int cols) {
  if (rows < 1 || cols < 1 || !region.valid()) {
    throw Error(Errc::invalid_argument, "grid needs rows, cols >= 1");
  }
  RoadGraph g;
  auto frac = [](int i, int n) { return n == 1 ? 0.5 : double(i) / (n - 1); };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      g.add_node({region.south() + frac(r, rows) * (region.north() - region.south()),
                  region.west() + frac(c, cols) * (region.east() - region.west())});
    }
  }
  auto id = [cols](int r, int c) { return static_cast<std::uint32_t>(r * cols + c); };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) g.add_street(id(r, c), id(r, c + 1));
      if (r + 1 < rows) g.add_street(id(r, c), id(r + 1, c));
    }
  }
  return g;
}

RoadGraph RoadGraph::parse(std::string_view text) {
  RoadGraph g;
  std::map<std::int64_t, std::uint32_t> ids;
  for_each_line(text, [&](const std::vector<std::string_view>& tok,
                          std::size_t line_no) {
    if (tok[0] == "node" && tok.size() == 4) {
      const auto id = parse_num<std::int64_t>(tok[1], line_no);
      const GeoPoint p{parse_num<double>(tok[2], line_no),
                       parse_num<double>(tok[3], line_no)};
      if (!ids.try_emplace(id, static_cast<std::uint32_t>(g.node_count())).second) {
        throw Error(Errc::parse_error,
                    "line " + std::to_string(line_no) + ": duplicate node");
      }
      g.add_node(p);
    } else if (tok[0] == "edge" && tok.size() == 3) {
      auto a = ids.find(parse_num<std::int64_t>(tok[1], line_no));
      auto b = ids.find(parse_num<std::int64_t>(tok[2], line_no));
      if (a == ids.end() || b == ids.end()) {
        throw Error(Errc::parse_error,
                    "line " + std::to_string(line_no) + ": unknown node");
      }
      try {
        g.add_street(a->second, b->second);
      } catch (const Error& e) {
        throw Error(Errc::parse_error,
                    "line " + std::to_string(line_no) + ": " + e.what());
      }
    } else {
      throw Error(Errc::parse_error,
                  "line " + std::to_string(line_no) + ": expected node/edge");
    }
  });
  return g;
}

RoadGraph RoadGraph::load(const std::string& path) {
  return parse(read_file(path));
}

void RoadGraph::validate(const BoundingBox& region) const {
  if (nodes_.empty()) throw Error(Errc::invalid_argument, "empty road graph");
  for (const auto& p : nodes_) {
    if (!region.contains(p)) {
      throw Error(Errc::invalid_argument, "road node outside region");
    }
  }
  std::vector<bool> seen(nodes_.size(), false);
  std::vector<std::uint32_t> stack{0};
  seen[0] = true;
  std::size_t reached = 1;
  while (!stack.empty()) {
    auto n = stack.back();
    stack.pop_back();
    for (const auto& s : adj_[n]) {
      if (!seen[s.to]) {
        seen[s.to] = true;
        ++reached;
        stack.push_back(s.to);
      }
    }
  }
  if (reached != nodes_.size()) {
    throw Error(Errc::invalid_argument, "road graph is not connected");
  }
}

// ---- drone walk ---------------------------------------------------------

DroneWalker::DroneWalker(const RoadGraph& graph, const WalkConfig& cfg,
                         std::uint64_t seed)
    : graph_(&graph), cfg_(cfg), rng_(seed) {
  if (graph.node_count() == 0) {
    throw Error(Errc::invalid_argument, "empty road graph");
  }
  start_ = static_cast<std::uint32_t>(uniform_index(rng_, graph.node_count()));
  at_ = start_;
  speed_ = cfg_.min_speed_mps +
           (cfg_.max_speed_mps - cfg_.min_speed_mps) * uniform01(rng_);
}

GeoPoint DroneWalker::next() {
  const double t =
      static_cast<double>(tick_++) * static_cast<double>(cfg_.sample_period_ms) /
      1000.0;
  auto start_leg = [this](const RoadGraph::Street& s, double when) {
    moving_ = true;
    to_ = s.to;
    length_ = s.length_m;
    depart_s_ = when;
    arrive_s_ = when + s.length_m / speed_;
  };
  for (;;) {
    if (moving_) {
      if (t < arrive_s_) {
        const double f = (t - depart_s_) / (arrive_s_ - depart_s_);
        const GeoPoint a = graph_->node(at_);
        const GeoPoint b = graph_->node(to_);
        return {a.lat + f * (b.lat - a.lat), a.lon + f * (b.lon - a.lon)};
      }
      ++legs_;
      distance_ += length_;
      at_ = to_;
      moving_ = false;
      const auto& out = graph_->streets(at_);
      if (out.size() == 1) {
        start_leg(out[0], arrive_s_);  // dead end: turn around
        continue;
      }
    }
    const auto& out = graph_->streets(at_);
    if (out.empty() || uniform01(rng_) < cfg_.hover_probability) {
      return graph_->node(at_);
    }
    start_leg(out[uniform_index(rng_, out.size())], t);
    return graph_->node(at_);
  }
}

std::vector<TracePoint> random_walk(const RoadGraph& graph,
                                    std::uint32_t drone_count,
                                    std::int64_t duration_ms, Timestamp start,
                                    std::uint64_t seed, const WalkConfig& cfg) {
  if (duration_ms <= 0) {
    throw Error(Errc::invalid_argument, "duration must be positive");
  }
  std::vector<TracePoint> out;
  const std::int64_t ticks = duration_ms / cfg.sample_period_ms;
  for (std::uint32_t d = 0; d < drone_count; ++d) {
    DroneWalker w(graph, cfg, derive_seed(seed, "drone-walk", d));
    for (std::int64_t k = 0; k < ticks; ++k) {
      out.push_back({d, start + k * cfg.sample_period_ms, w.next()});
    }
  }
  return out;
}

std::string trace_csv(const std::vector<TracePoint>& trace) {
  std::string out = "drone_id,timestamp,lat,lon\n";
  char buf[64];
  for (const auto& p : trace) {
    out += std::to_string(p.drone_id);
    out += ',';
    out += std::to_string(p.timestamp);
    for (double v : {p.location.lat, p.location.lon}) {
      out += ',';
      auto r = std::to_chars(buf, buf + sizeof buf, v);
      out.append(buf, r.ptr);
    }
    out += '\n';
  }
  return out;
}

// ---- sensors ------------------------------------------------------------

SensorModel::SensorModel(std::uint64_t seed) {
  Rng rng(derive_seed(seed, "sensor-field"));
  struct Spec {
    const char* name;
    double base;
    double amplitude;
  };
  constexpr Spec specs[] = {
      {"humidity", 65.0, 12.0}, {"pm25", 55.0, 25.0}, {"temperature", 28.0, 5.0}};
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (const auto& s : specs) {
    Field f{s.name, s.base, {}};
    for (int k = 0; k < 3; ++k) {
      Wave w{};
      w.k_lat = (5.0 + 35.0 * uniform01(rng)) * two_pi;
      w.k_lon = (5.0 + 35.0 * uniform01(rng)) * two_pi;
      const double period_ms = (2.0 + 10.0 * uniform01(rng)) * 3'600'000.0;
      w.omega = two_pi / period_ms;
      w.phase = two_pi * uniform01(rng);
      w.amplitude = s.amplitude * (0.5 + 0.5 * uniform01(rng)) / 3.0;
      f.waves.push_back(w);
    }
    fields_.push_back(std::move(f));
  }
}

const std::vector<std::string>& SensorModel::field_names() {
  static const std::vector<std::string> names{"humidity", "pm25", "temperature"};
  return names;
}

std::map<std::string, double, std::less<>> SensorModel::sample(
    GeoPoint p, Timestamp t) const {
  std::map<std::string, double, std::less<>> out;
  for (const auto& f : fields_) {
    double v = f.base;
    for (const auto& w : f.waves) {
      v += w.amplitude * std::sin(w.k_lat * p.lat + w.k_lon * p.lon +
                                  w.omega * static_cast<double>(t) + w.phase);
    }
    out.emplace(f.name, v);
  }
  return out;
}

// ---- shards -------------------------------------------------------------

std::string make_uuid(Rng& rng) {
  std::uint64_t hi = rng();
  std::uint64_t lo = rng();
  hi = (hi & ~0xF000ULL) | 0x4000ULL;                      // version 4
  lo = (lo & 0x3FFFFFFFFFFFFFFFULL) | 0x8000000000000000ULL;  // RFC 4122
  char buf[37];
  std::snprintf(buf, sizeof buf, "%08x-%04x-%04x-%04x-%012llx",
                static_cast<unsigned>(hi >> 32),
                static_cast<unsigned>((hi >> 16) & 0xFFFF),
                static_cast<unsigned>(hi & 0xFFFF),
                static_cast<unsigned>(lo >> 48),
                static_cast<unsigned long long>(lo & 0xFFFFFFFFFFFFULL));
  return buf;
}

ShardEmitter::ShardEmitter(const RoadGraph& graph, const SensorModel& sensors,
                           std::uint32_t drone_id, Timestamp start,
                           std::uint64_t seed, const EmitConfig& cfg)
    : sensors_(&sensors),
      cfg_(cfg),
      walker_(graph, cfg.walk, derive_seed(seed, "drone-walk", drone_id)),
      id_rng_(derive_seed(seed, "shard-id", drone_id)),
      drone_id_(drone_id),
      start_(start) {
  if (cfg_.samples_per_shard == 0) {
    throw Error(Errc::invalid_argument, "samples_per_shard must be positive");
  }
}

EmittedShard ShardEmitter::next() {
  EmittedShard out;
  out.drone_id = drone_id_;
  out.shard.shard_id = make_uuid(id_rng_);
  out.shard.tuples.reserve(cfg_.samples_per_shard);
  for (std::size_t i = 0; i < cfg_.samples_per_shard; ++i, ++sample_) {
    Tuple t;
    t.timestamp = start_ + sample_ * cfg_.walk.sample_period_ms;
    t.location = walker_.next();
    t.shard_id = out.shard.shard_id;
    t.fields = sensors_->sample(t.location, t.timestamp);
    out.emit_time = t.timestamp;
    out.position = t.location;
    out.shard.tuples.push_back(std::move(t));
  }
  out.shard.fit_bounds();
  return out;
}

std::vector<EmittedShard> emit_shards(const RoadGraph& graph,
                                      const SensorModel& sensors,
                                      std::uint32_t drone_id, Timestamp start,
                                      std::int64_t duration_ms,
                                      std::uint64_t seed,
                                      const EmitConfig& cfg) {
  ShardEmitter em(graph, sensors, drone_id, start, seed, cfg);
  std::vector<EmittedShard> out;
  const std::int64_t n = duration_ms / em.shard_period_ms();
  out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(n, 0)));
  for (std::int64_t i = 0; i < n; ++i) out.push_back(em.next());
  return out;
}

// ---- queries ------------------------------------------------------------

std::string grid_cell_name(int window_index, int side_index) {
  static const char* windows[] = {"5min", "30min", "2h"};
  static const char* sides[] = {"200m", "1km", "5km"};
  return std::string(windows[window_index]) + "/" + sides[side_index];
}

std::vector<GridQuery> query_grid(std::uint64_t seed,
                                  std::size_t count_per_cell,
                                  const BoundingBox& extent,
                                  const TimeRange& time_extent) {
  if (!extent.valid() || !time_extent.valid()) {
    throw Error(Errc::invalid_argument, "query grid needs a valid extent");
  }
  Rng rng(derive_seed(seed, "query-grid"));
  std::vector<GridQuery> out;
  out.reserve(9 * count_per_cell);
  const double span_t = static_cast<double>(time_extent.end - time_extent.start);
  for (int w = 0; w < 3; ++w) {
    for (int s = 0; s < 3; ++s) {
      for (std::size_t k = 0; k < count_per_cell; ++k) {
        const Timestamp tc =
            time_extent.start +
            static_cast<Timestamp>(std::floor(uniform01(rng) * span_t));
        const double lat =
            extent.south() + uniform01(rng) * (extent.north() - extent.south());
        const double lon =
            extent.west() + uniform01(rng) * (extent.east() - extent.west());
        const MetricFrame frame{lat};
        const double half = kGridSidesM[s] / 2.0;
        const double dlat = half / frame.metres_per_deg_lat();
        const double dlon = half / frame.metres_per_deg_lon();
        GridQuery g;
        g.window_index = w;
        g.side_index = s;
        g.cell = grid_cell_name(w, s);
        g.query.combinator = Combinator::all_of;
        g.query.bbox =
            BoundingBox::from_bounds(lat - dlat, lon - dlon, lat + dlat, lon + dlon);
        g.query.range = TimeRange{tc - kGridWindowsMs[w] / 2,
                                  tc + kGridWindowsMs[w] / 2};
        out.push_back(std::move(g));
      }
    }
  }
  return out;
}

// ---- sites --------------------------------------------------------------

std::vector<Site> lattice_sites(const BoundingBox& region, std::size_t count,
                                std::uint64_t seed, double jitter) {
  if (count == 0 || !region.valid()) {
    throw Error(Errc::invalid_argument, "lattice needs a region and count > 0");
  }
  const MetricFrame frame{(region.north() + region.south()) / 2};
  const double width = (region.east() - region.west()) * frame.metres_per_deg_lon();
  const double height =
      (region.north() - region.south()) * frame.metres_per_deg_lat();
  const auto nx = static_cast<std::size_t>(std::max(
      1.0, std::round(std::sqrt(static_cast<double>(count) * width / height))));
  const std::size_t ny = (count + nx - 1) / nx;

  Rng rng(derive_seed(seed, "edge-sites"));
  std::vector<GeoPoint> pts;
  for (std::size_t i = 0; i < ny; ++i) {
    for (std::size_t j = 0; j < nx; ++j) {
      const double fx = (static_cast<double>(j) + 0.5 +
                         jitter * (2.0 * uniform01(rng) - 1.0)) / nx;
      const double fy = (static_cast<double>(i) + 0.5 +
                         jitter * (2.0 * uniform01(rng) - 1.0)) / ny;
      pts.push_back({region.south() + fy * (region.north() - region.south()),
                     region.west() + fx * (region.east() - region.west())});
    }
  }
  // Fisher-Yates with our own index draw so the order is portable.
  for (std::size_t i = pts.size(); i > 1; --i) {
    std::swap(pts[i - 1], pts[uniform_index(rng, i)]);
  }
  std::vector<Site> sites;
  for (std::size_t k = 0; k < count; ++k) {
    sites.push_back({edge_id(static_cast<std::uint32_t>(k)), pts[k]});
  }
  return sites;
}

std::vector<Site> parse_sites(std::string_view text) {
  std::vector<Site> sites;
  for_each_line(text, [&](const std::vector<std::string_view>& tok,
                          std::size_t line_no) {
    if (tok.size() != 3) {
      throw Error(Errc::parse_error,
                  "line " + std::to_string(line_no) + ": expected id lat lon");
    }
    sites.push_back({edge_id(parse_num<std::uint32_t>(tok[0], line_no)),
                     {parse_num<double>(tok[1], line_no),
                      parse_num<double>(tok[2], line_no)}});
  });
  return sites;
}

}  // namespace aerialdb
