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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "aerialdb/cluster.hpp"
#include "aerialdb/config.hpp"
#include "aerialdb/errors.hpp"
#include "aerialdb/experiment.hpp"
#include "aerialdb/hashing.hpp"
#include "aerialdb/planner.hpp"
#include "aerialdb/verify.hpp"
#include "aerialdb/xxhash64.hpp"

namespace py = pybind11;
using namespace aerialdb;

namespace {

using TupleIn = std::tuple<Timestamp, double, double, std::map<std::string, double>>;

BoundingBox box_from(const std::tuple<double, double, double, double>& b) {
  const auto [south, west, north, east] = b;
  return BoundingBox::from_bounds(south, west, north, east);
}

// Planner input: shard id -> replica edge ids.
ReplicaMap replica_map(const std::map<std::string, std::vector<std::uint32_t>>& in) {
  ReplicaMap m;
  for (const auto& [id, reps] : in) {
    auto& v = m[id];
    for (auto e : reps) v.push_back(edge_id(e));
  }
  return m;
}

EdgeSet edge_set(const std::vector<std::uint32_t>& ids) {
  EdgeSet s;
  for (auto e : ids) s.insert(edge_id(e));
  return s;
}

py::dict plan_dict(const PlanAssignment& p) {
  py::dict assignment;
  for (const auto& [e, shards] : p.assignment)
    assignment[py::int_(to_u32(e))] = std::vector<std::string>(shards.begin(), shards.end());
  py::dict out;
  out["assignment"] = assignment;
  out["unreachable"] = p.unreachable;
  return out;
}

class PyCluster {
 public:
  explicit PyCluster(const std::string& config_text)
      : cluster_(std::make_unique<Cluster>(parse_config(config_text))) {}

  std::vector<std::uint32_t> edges() const {
    std::vector<std::uint32_t> out;
    for (EdgeId e : cluster_->edge_ids()) out.push_back(to_u32(e));
    return out;
  }

  py::dict insert(const std::string& shard_id, const std::vector<TupleIn>& rows) {
    Shard s;
    s.shard_id = shard_id;
    for (const auto& [ts, lat, lon, fields] : rows) {
      Tuple t;
      t.timestamp = ts;
      t.location = {lat, lon};
      t.shard_id = shard_id;
      t.fields.insert(fields.begin(), fields.end());
      s.tuples.push_back(std::move(t));
    }
    if (s.tuples.empty()) throw Error(Errc::invalid_shard, "shard has no tuples");
    s.fit_bounds();
    const InsertOutcome o = cluster_->insert(s);
    py::dict out;
    out["ok"] = o.response.ok;
    out["error"] = o.response.error;
    std::vector<std::uint32_t> reps;
    for (EdgeId e : o.response.replicas) reps.push_back(to_u32(e));
    out["replicas"] = reps;
    out["latency_ms"] = to_ms(o.latency);
    return out;
  }

  py::dict query(std::optional<std::tuple<double, double, double, double>> bbox,
                 std::optional<std::pair<Timestamp, Timestamp>> time,
                 std::optional<std::string> shard_id, bool any_of,
                 const std::string& planner, const std::string& coordinator) {
    Query q;
    if (bbox) q.bbox = box_from(*bbox);
    if (time) q.range = TimeRange{time->first, time->second};
    q.shard_id = std::move(shard_id);
    q.combinator = any_of ? Combinator::any_of : Combinator::all_of;
    QueryOptions opt;
    opt.planner = parse_planner(planner);
    const QueryOutcome o = cluster_->query(q, opt, parse_coordinator(coordinator));
    py::list rows;
    for (const ResultRow& r : o.response.rows) {
      std::map<std::string, double> fields(r.tuple.fields.begin(), r.tuple.fields.end());
      rows.append(py::make_tuple(r.tuple.timestamp, r.tuple.location.lat,
                                 r.tuple.location.lon, r.tuple.shard_id, fields));
    }
    py::dict out;
    out["ok"] = o.response.ok;
    out["error"] = o.response.error;
    out["rows"] = rows;
    out["unreachable_shards"] = o.response.unreachable_shards;
    out["coordinator"] = to_u32(o.coordinator);
    out["edges_queried"] = o.response.stats.edges_queried;
    out["shards_matched"] = o.response.stats.shards_matched;
    out["executed_locally"] = o.response.stats.executed_locally;
    out["latency_ms"] = to_ms(o.latency);
    return out;
  }

  void fail(std::uint32_t e) { cluster_->fail(edge_id(e)); }
  void recover(std::uint32_t e) { cluster_->recover(edge_id(e)); }
  void settle() { cluster_->settle(); }
  double now_ms() const { return to_ms(cluster_->transport().now()); }

 private:
  std::unique_ptr<Cluster> cluster_;
};

py::tuple run_result(const RunResult& r) {
  std::vector<std::string> files;
  for (const auto& f : r.files) files.push_back(f.string());
  return py::make_tuple(r.exit_code, files, r.summary);
}

}  // namespace

PYBIND11_MODULE(_aerialdb, m) {
  m.doc() = "Federated spatio-temporal edge datastore simulator";

  // Later translators run first, so this one prefixes the error code.
  static PyObject* exc_type =
      py::register_exception<Error>(m, "AerialDBError", PyExc_ValueError).ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(py::handle(exc_type),
                    (std::string(errc_name(e.code())) + ": " + e.what()).c_str());
    }
  });

  m.attr("PROTOCOL_VERSION") = kProtocolVersion;

  m.def("xxh64", [](py::bytes data, std::uint64_t seed) {
    return xxh64(std::string_view(data), seed);
  }, py::arg("data"), py::arg("seed") = 0);

  m.def("hash_id", [](const std::string& id, std::size_t edges, std::uint64_t seed) {
    HashConfig cfg;
    for (std::uint32_t i = 0; i < edges; ++i) cfg.edge_ids.push_back(edge_id(i));
    cfg.hash_seed = seed;
    cfg.validate();
    return to_u32(hash_id(id, cfg));
  }, py::arg("shard_id"), py::arg("edge_count"), py::arg("seed") = 0,
     "Edge index for a shard id over edges 0..edge_count-1.");

  m.def("locate", [](const std::vector<std::tuple<std::uint32_t, double, double>>& sites,
                     std::tuple<double, double, double, double> region,
                     std::vector<std::pair<double, double>> points) {
    std::vector<Site> s;
    for (const auto& [id, lat, lon] : sites) s.push_back({edge_id(id), {lat, lon}});
    const auto part = build_voronoi(s, box_from(region));
    std::vector<std::uint32_t> out;
    for (const auto& [lat, lon] : points) out.push_back(to_u32(part.locate({lat, lon})));
    return out;
  }, py::arg("sites"), py::arg("region"), py::arg("points"),
     "Voronoi cell owner for each point. region is (south, west, north, east).");

  m.def("plan", [](const std::string& planner,
                   const std::map<std::string, std::vector<std::uint32_t>>& shards,
                   const std::vector<std::uint32_t>& live, std::uint64_t seed) {
    Rng rng(seed);
    return plan_dict(make_plan(parse_planner(planner), replica_map(shards),
                               edge_set(live), rng));
  }, py::arg("planner"), py::arg("shards"), py::arg("live"), py::arg("seed") = 0);

  m.def("format_config", [](const std::string& text) {
    return format_config(parse_config(text));
  }, py::arg("text") = "", "Full configuration with defaults filled in.");

  m.def("run_insert", [](const std::string& text, const std::string& out) {
    py::gil_scoped_release nogil;
    return run_insert(parse_config(text), out);
  }, py::arg("config"), py::arg("out_dir"));
  m.def("run_query", [](const std::string& text, const std::string& out) {
    py::gil_scoped_release nogil;
    return run_query(parse_config(text), out);
  }, py::arg("config"), py::arg("out_dir"));
  m.def("run_failure", [](const std::string& text, const std::string& out) {
    py::gil_scoped_release nogil;
    return run_failure(parse_config(text), out);
  }, py::arg("config"), py::arg("out_dir"));

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("exit_code", &RunResult::exit_code)
      .def_property_readonly("files", [](const RunResult& r) {
        std::vector<std::string> out;
        for (const auto& f : r.files) out.push_back(f.string());
        return out;
      })
      .def_readonly("summary", &RunResult::summary)
      .def("as_tuple", &run_result);

  m.def("verify", [](const std::string& text, std::size_t coverage_maps,
                     std::size_t slice_pairs, bool cluster_checks) {
    VerifyOptions opt;
    opt.coverage_maps = coverage_maps;
    opt.slice_pairs = slice_pairs;
    opt.cluster_checks = cluster_checks;
    VerifyReport rep;
    {
      py::gil_scoped_release nogil;
      rep = verify(parse_config(text), opt);
    }
    return py::make_tuple(rep.passed(), rep.text());
  }, py::arg("config") = "", py::arg("coverage_maps") = 10'000,
     py::arg("slice_pairs") = 100'000, py::arg("cluster_checks") = true);

  py::class_<PyCluster>(m, "Cluster")
      .def(py::init<const std::string&>(), py::arg("config") = "")
      .def_property_readonly("edges", &PyCluster::edges)
      .def("insert", &PyCluster::insert, py::arg("shard_id"), py::arg("rows"),
           "rows: list of (timestamp_ms, lat, lon, {field: value}).")
      .def("query", &PyCluster::query, py::arg("bbox") = py::none(),
           py::arg("time") = py::none(), py::arg("shard_id") = py::none(),
           py::arg("any_of") = false, py::arg("planner") = "minshards",
           py::arg("coordinator") = "rc")
      .def("fail", &PyCluster::fail)
      .def("recover", &PyCluster::recover)
      .def("settle", &PyCluster::settle)
      .def_property_readonly("now_ms", &PyCluster::now_ms);
}
