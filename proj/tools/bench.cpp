/*
 * Copyright 2026 The olapnet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// bench: command-line front end of the benchmark harness.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "olapnet/bench.hpp"

using namespace olapnet;

namespace {

void emit_report(const std::vector<bench::BenchReport>& rows, const std::string& out) {
  if (out.empty()) {
    bench::write_report(std::cout, rows);
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open " + out + " for writing");
  bench::write_report(f, rows);
}

std::string default_or(int query, const std::string& v) { return v.empty() ? queries::default_variant(query) : v; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed columnar OLAP engine benchmark harness"};
  app.require_subcommand(1);

  int query = 0;
  std::string variant, params, out;
  int nodes = 1;
  double sf = 0.01;
  auto* run = app.add_subcommand("run", "Run one query once and print its result and report");
  run->add_option("--query", query, "TPC-H query number")->required();
  run->add_option("--variant", variant, "Plan variant (default: first variant of the query)");
  run->add_option("--nodes", nodes, "Number of simulated nodes")->check(CLI::PositiveNumber);
  run->add_option("--sf", sf, "Scale factor")->check(CLI::PositiveNumber);
  run->add_option("--params", params, "Query parameters k=v,...");
  run->add_option("--out", out, "Write the report CSV here instead of stdout");

  double base_sf = 0.005;
  std::vector<int> node_list = {1, 2, 4, 8};
  int repeats = 3;
  auto* weak = app.add_subcommand("weak", "Weak scaling: sf = base-sf * P for each P");
  weak->add_option("--query", query, "TPC-H query number")->required();
  weak->add_option("--variant", variant, "Plan variant");
  weak->add_option("--base-sf", base_sf, "Scale factor per node")->check(CLI::PositiveNumber);
  weak->add_option("--nodes", node_list, "Node counts")->delimiter(',')->check(CLI::PositiveNumber);
  weak->add_option("--repeats", repeats, "Runs per configuration")->check(CLI::PositiveNumber);
  weak->add_option("--params", params, "Query parameters k=v,...");
  weak->add_option("--out", out, "Write the report CSV here instead of stdout");

  auto* verify = app.add_subcommand("verify", "Check every query and variant against the single-node oracle");
  verify->add_option("--sf", sf, "Scale factor")->check(CLI::PositiveNumber);
  verify->add_option("--nodes", node_list, "Node counts")->delimiter(',')->check(CLI::PositiveNumber);
  bool flip = false;
  verify->add_flag("--inject-tiebreak-fault", flip, "Corrupt result order to check that verification fails");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto seed = tpch::seed_from_env();
    if (*run) {
      variant = default_or(query, variant);
      auto r = bench::run_single(query, variant, nodes, sf, queries::QueryParams::parse(params), {seed, {}});
      r.result.write_csv(std::cout);
      std::cerr << "query " << query << " (" << variant << ") P=" << nodes << " sf=" << sf << ": "
                << r.result.size() << " rows, " << r.report.walltime_ms << " ms, " << r.report.bytes_sent_total
                << " bytes sent\n";
      emit_report({r.report}, out);
      return 0;
    }
    if (*weak) {
      variant = default_or(query, variant);
      auto rows = bench::run_weak_scaling(query, variant, base_sf, node_list, repeats,
                                          queries::QueryParams::parse(params), {seed, {}});
      emit_report(rows, out);
      return 0;
    }
    bench::VerifyOptions vo;
    vo.seed = seed;
    vo.fault = flip ? bench::Fault::FlipTieBreak : bench::Fault::None;
    vo.log = &std::cout;
    auto s = bench::verify_all(sf, node_list, vo);
    for (const auto& w : s.warnings) std::cout << "warning: " << w << "\n";
    for (const auto& f : s.failures) std::cout << "mismatch: " << f << "\n";
    std::cout << (s.passed() ? "PASS" : "FAIL") << ": " << s.checks << " checks, " << s.failures.size()
              << " failures\n";
    return s.passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
