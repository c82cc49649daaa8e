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

#include "aerialdb/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "aerialdb/errors.hpp"

namespace aerialdb {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad(std::string_view key, std::string_view value,
                      std::string_view why) {
  throw Error(Errc::invalid_config, std::string(key) + " = '" +
                                        std::string(value) + "': " +
                                        std::string(why));
}

template <typename T>
T num(std::string_view key, std::string_view v) {
  v = trim(v);
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) bad(key, v, "not a number");
  return out;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    auto pos = s.find(sep);
    out.push_back(trim(s.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    s = s.substr(pos + 1);
  }
  return out;
}

GeoPoint point(std::string_view key, std::string_view v) {
  auto parts = split(v, ',');
  if (parts.size() != 2) bad(key, v, "expected lat,lon");
  return {num<double>(key, parts[0]), num<double>(key, parts[1])};
}

template <typename T>
std::vector<T> list(std::string_view key, std::string_view v) {
  std::vector<T> out;
  if (trim(v).empty()) return out;
  for (auto part : split(v, ',')) out.push_back(num<T>(key, part));
  return out;
}

std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string fmt(GeoPoint p) { return fmt(p.lat) + "," + fmt(p.lon); }

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

std::int64_t us(SimTime t) { return t.count(); }

}  // namespace

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  const std::string_view v = trim(value);
  auto ms = [&](std::string_view k) { return from_ms(num<double>(k, v)); };
  auto micros = [&](std::string_view k) { return SimTime{num<std::int64_t>(k, v)}; };

  if (key == "seed") seed = num<std::uint64_t>(key, v);
  else if (key == "edge_count") edge_count = num<std::size_t>(key, v);
  else if (key == "drone_count") drone_count = num<std::uint32_t>(key, v);
  else if (key == "duration_hours") duration_hours = num<double>(key, v);
  else if (key == "planner") {
    try {
      planner = parse_planner(v);
    } catch (const Error& e) {
      bad(key, v, e.what());
    }
  } else if (key == "coordinator") {
    try {
      coordinator = parse_coordinator(v);
    } catch (const Error& e) {
      bad(key, v, e.what());
    }
  }
  else if (key == "tau_seconds") tau_seconds = num<std::int64_t>(key, v);
  else if (key == "sigma_degrees") sigma_degrees = num<double>(key, v);
  else if (key == "grid_origin") {
    if (v.empty()) grid_origin.reset(); else grid_origin = point(key, v);
  }
  else if (key == "epoch_origin") epoch_origin = num<std::int64_t>(key, v);
  else if (key == "hash_seed") hash_seed = num<std::uint64_t>(key, v);
  else if (key == "region.top_left") region.top_left = point(key, v);
  else if (key == "region.bottom_right") region.bottom_right = point(key, v);
  else if (key == "sites_file") sites_file = std::string(v);
  else if (key == "road_graph_file") road_graph_file = std::string(v);
  else if (key == "road.rows") road_rows = num<int>(key, v);
  else if (key == "road.cols") road_cols = num<int>(key, v);
  else if (key == "latency.drone_edge_ms") transport.latency.drone_edge_ms = num<double>(key, v);
  else if (key == "latency.edge_edge_ms") transport.latency.edge_edge_ms = num<double>(key, v);
  else if (key == "latency.jitter_ms") transport.latency.jitter_ms = num<double>(key, v);
  else if (key == "bandwidth.drone_edge_mbps") transport.latency.drone_edge_mbps = num<double>(key, v);
  else if (key == "bandwidth.edge_edge_mbps") transport.latency.edge_edge_mbps = num<double>(key, v);
  else if (key == "heartbeat.interval_ms") transport.heartbeat.interval = ms(key);
  else if (key == "heartbeat.misses") transport.heartbeat.misses = num<int>(key, v);
  else if (key == "timeout_ms") transport.timeout = ms(key);
  else if (key == "query.count_per_cell") query_count_per_cell = num<std::size_t>(key, v);
  else if (key == "query.clients") query_clients = list<std::size_t>(key, v);
  else if (key == "query.batch_size") batch_size = num<std::size_t>(key, v);
  else if (key == "failure.schedule") {
    failure_schedule.clear();
    if (!v.empty()) {
      for (auto item : split(v, ',')) {
        auto colon = item.find(':');
        if (colon == std::string_view::npos) bad(key, v, "expected t_ms:edge");
        failure_schedule.push_back(
            {num<std::int64_t>(key, item.substr(0, colon)),
             edge_id(num<std::uint32_t>(key, item.substr(colon + 1)))});
      }
    }
  }
  else if (key == "failure.counts") failure_counts = list<std::size_t>(key, v);
  else if (key == "failure.trials") failure_trials = num<std::size_t>(key, v);
  else if (key == "walk.min_speed_mps") emit.walk.min_speed_mps = num<double>(key, v);
  else if (key == "walk.max_speed_mps") emit.walk.max_speed_mps = num<double>(key, v);
  else if (key == "walk.hover_probability") emit.walk.hover_probability = num<double>(key, v);
  else if (key == "walk.sample_period_ms") emit.walk.sample_period_ms = num<std::int64_t>(key, v);
  else if (key == "shard.samples") emit.samples_per_shard = num<std::size_t>(key, v);
  else if (key == "cost.lookup_us") cost.lookup = micros(key);
  else if (key == "cost.index_add_us") cost.index_add = micros(key);
  else if (key == "cost.insert_per_tuple_us") cost.insert_per_tuple = micros(key);
  else if (key == "cost.sub_query_base_us") cost.sub_query_base = micros(key);
  else if (key == "cost.sub_query_per_shard_us") cost.sub_query_per_shard = micros(key);
  else if (key == "cost.sub_query_per_tuple_us") cost.sub_query_per_tuple = micros(key);
  else throw Error(Errc::invalid_config, "unknown key '" + std::string(key) + "'");
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& why) {
    throw Error(Errc::invalid_config, why);
  };
  if (edge_count < 3 && sites_file.empty()) fail("edge_count must be >= 3");
  if (drone_count < 1) fail("drone_count must be >= 1");
  if (!(duration_hours > 0)) fail("duration_hours must be positive");
  if (tau_seconds <= 0) fail("tau_seconds must be positive");
  if (!(sigma_degrees > 0)) fail("sigma_degrees must be positive");
  if (!region.valid() || region.north() == region.south() ||
      region.east() == region.west()) {
    fail("region must be a non-degenerate box");
  }
  if (road_rows < 1 || road_cols < 1) fail("road grid needs rows, cols >= 1");
  if (transport.heartbeat.misses < 1) fail("heartbeat.misses must be >= 1");
  if (transport.heartbeat.interval <= SimTime::zero()) {
    fail("heartbeat.interval_ms must be positive");
  }
  if (transport.timeout <= SimTime::zero()) fail("timeout_ms must be positive");
  if (transport.latency.drone_edge_mbps <= 0 ||
      transport.latency.edge_edge_mbps <= 0) {
    fail("bandwidth must be positive");
  }
  if (batch_size < 1) fail("query.batch_size must be >= 1");
  if (query_clients.empty()) fail("query.clients needs at least one value");
  for (auto c : query_clients) {
    if (c < 1) fail("query.clients values must be >= 1");
  }
  if (emit.walk.sample_period_ms <= 0) fail("walk.sample_period_ms must be positive");
  if (emit.samples_per_shard < 1) fail("shard.samples must be >= 1");
  if (!(emit.walk.min_speed_mps > 0) ||
      emit.walk.max_speed_mps < emit.walk.min_speed_mps) {
    fail("walk speeds must satisfy 0 < min <= max");
  }
  if (emit.walk.hover_probability < 0 || emit.walk.hover_probability > 1) {
    fail("walk.hover_probability must lie in [0, 1]");
  }
  if (sites_file.empty()) {
    for (const auto& f : failure_schedule) {
      if (to_u32(f.edge) >= edge_count) {
        fail("failure.schedule names unknown edge " + to_string(f.edge));
      }
    }
    for (auto c : failure_counts) {
      if (c >= edge_count) fail("failure.counts must be < edge_count");
    }
  }
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::entries()
    const {
  std::string schedule;
  for (const auto& f : failure_schedule) {
    if (!schedule.empty()) schedule += ",";
    schedule += std::to_string(f.at_ms) + ":" + to_string(f.edge);
  }
  return {
      {"seed", std::to_string(seed)},
      {"edge_count", std::to_string(edge_count)},
      {"drone_count", std::to_string(drone_count)},
      {"duration_hours", fmt(duration_hours)},
      {"planner", std::string(to_string(planner))},
      {"coordinator", to_string(coordinator)},
      {"tau_seconds", std::to_string(tau_seconds)},
      {"sigma_degrees", fmt(sigma_degrees)},
      {"grid_origin", grid_origin ? fmt(*grid_origin) : ""},
      {"epoch_origin", std::to_string(epoch_origin)},
      {"hash_seed", std::to_string(hash_seed)},
      {"region.top_left", fmt(region.top_left)},
      {"region.bottom_right", fmt(region.bottom_right)},
      {"sites_file", sites_file},
      {"road_graph_file", road_graph_file},
      {"road.rows", std::to_string(road_rows)},
      {"road.cols", std::to_string(road_cols)},
      {"latency.drone_edge_ms", fmt(transport.latency.drone_edge_ms)},
      {"latency.edge_edge_ms", fmt(transport.latency.edge_edge_ms)},
      {"latency.jitter_ms", fmt(transport.latency.jitter_ms)},
      {"bandwidth.drone_edge_mbps", fmt(transport.latency.drone_edge_mbps)},
      {"bandwidth.edge_edge_mbps", fmt(transport.latency.edge_edge_mbps)},
      {"heartbeat.interval_ms", fmt(to_ms(transport.heartbeat.interval))},
      {"heartbeat.misses", std::to_string(transport.heartbeat.misses)},
      {"timeout_ms", fmt(to_ms(transport.timeout))},
      {"query.count_per_cell", std::to_string(query_count_per_cell)},
      {"query.clients", join(query_clients)},
      {"query.batch_size", std::to_string(batch_size)},
      {"failure.schedule", schedule},
      {"failure.counts", join(failure_counts)},
      {"failure.trials", std::to_string(failure_trials)},
      {"walk.min_speed_mps", fmt(emit.walk.min_speed_mps)},
      {"walk.max_speed_mps", fmt(emit.walk.max_speed_mps)},
      {"walk.hover_probability", fmt(emit.walk.hover_probability)},
      {"walk.sample_period_ms", std::to_string(emit.walk.sample_period_ms)},
      {"shard.samples", std::to_string(emit.samples_per_shard)},
      {"cost.lookup_us", std::to_string(us(cost.lookup))},
      {"cost.index_add_us", std::to_string(us(cost.index_add))},
      {"cost.insert_per_tuple_us", std::to_string(us(cost.insert_per_tuple))},
      {"cost.sub_query_base_us", std::to_string(us(cost.sub_query_base))},
      {"cost.sub_query_per_shard_us", std::to_string(us(cost.sub_query_per_shard))},
      {"cost.sub_query_per_tuple_us", std::to_string(us(cost.sub_query_per_tuple))},
  };
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::invalid_config,
                  "line " + std::to_string(line_no) + ": expected key = value");
    }
    base.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::invalid_config, "cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : cfg.entries()) out += k + " = " + v + "\n";
  return out;
}

}  // namespace aerialdb
