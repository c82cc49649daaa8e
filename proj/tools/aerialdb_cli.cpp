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

// Command-line harness: run-insert, run-query, run-failure, verify.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "aerialdb/config.hpp"
#include "aerialdb/errors.hpp"
#include "aerialdb/experiment.hpp"
#include "aerialdb/verify.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string planner;
  std::string coordinator;
  std::string out = "out";
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "Experiment config file (key = value)");
  cmd->add_option("--seed", a.seed, "Override the base seed");
  cmd->add_option("--planner", a.planner, "random | minshards | minedges");
  cmd->add_option("--coordinator", a.coordinator, "rc | lc-<n>");
  cmd->add_option("--out", a.out, "Output directory for CSV files");
}

aerialdb::ExperimentConfig resolve(const CommonArgs& a) {
  aerialdb::ExperimentConfig cfg;
  if (!a.config.empty()) cfg = aerialdb::load_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  if (!a.planner.empty()) cfg.set("planner", a.planner);
  if (!a.coordinator.empty()) cfg.set("coordinator", a.coordinator);
  cfg.validate();
  return cfg;
}

int report(const aerialdb::RunResult& r) {
  std::cout << r.summary << "\n";
  for (const auto& f : r.files) std::cout << "wrote " << f.string() << "\n";
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aerialdb: federated spatio-temporal edge datastore simulator"};
  app.require_subcommand(1);

  CommonArgs insert_args, query_args, failure_args, verify_args;
  auto* insert_cmd = app.add_subcommand("run-insert", "Run the insertion workload");
  add_common(insert_cmd, insert_args);
  auto* query_cmd = app.add_subcommand("run-query", "Run the query grid");
  add_common(query_cmd, query_args);
  auto* failure_cmd =
      app.add_subcommand("run-failure", "Run queries under edge failures");
  add_common(failure_cmd, failure_args);
  auto* verify_cmd = app.add_subcommand("verify", "Check protocol properties");
  add_common(verify_cmd, verify_args);
  aerialdb::VerifyOptions vopts;
  verify_cmd->add_flag("--inject-duplicate-replica", vopts.inject_duplicate_replica,
                       "Negative control: planner assigns a shard twice");
  verify_cmd->add_flag("--inject-grid-anchor-bug", vopts.inject_grid_anchor_bug,
                       "Negative control: query slices anchored per bbox");
  bool skip_cluster = false;
  verify_cmd->add_flag("--skip-cluster", skip_cluster,
                       "Only run the cluster-free properties");
  verify_cmd->add_option("--coverage-maps", vopts.coverage_maps);
  verify_cmd->add_option("--slice-pairs", vopts.slice_pairs);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*insert_cmd) {
      return report(aerialdb::run_insert(resolve(insert_args), insert_args.out));
    }
    if (*query_cmd) {
      return report(aerialdb::run_query(resolve(query_args), query_args.out));
    }
    if (*failure_cmd) {
      return report(aerialdb::run_failure(resolve(failure_args), failure_args.out));
    }
    if (*verify_cmd) {
      vopts.cluster_checks = !skip_cluster;
      const auto cfg = resolve(verify_args);
      const auto rep = aerialdb::verify(cfg, vopts);
      std::cout << rep.text();
      std::cout << (rep.passed() ? "verify: all properties hold\n"
                                 : "verify: property violation\n");
      return rep.passed() ? 0 : 1;
    }
  } catch (const aerialdb::Error& e) {
    std::cerr << "error: " << aerialdb::errc_name(e.code()) << ": " << e.what()
              << "\n";
    const auto c = e.code();
    return c == aerialdb::Errc::invalid_config || c == aerialdb::Errc::parse_error ||
                   c == aerialdb::Errc::duplicate_site ||
                   c == aerialdb::Errc::site_outside_region
               ? 2
               : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
