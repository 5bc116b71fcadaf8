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

#include <gtest/gtest.h>

#include <sstream>

#include "olapnet/bench.hpp"

using namespace olapnet;
using namespace olapnet::bench;

TEST(Report, HeaderMatchesFields) {
  std::ostringstream os;
  write_report(os, {});
  EXPECT_EQ(os.str(),
            "query,variant,P,sf,walltime_ms,comm_blocked_ms,comm_fraction,bytes_sent_total,bytes_per_phase,"
            "rows_scanned_per_node\r\n");
}

TEST(Report, RowFormatting) {
  BenchReport r;
  r.query = 15;
  r.variant = "approx";
  r.P = 2;
  r.sf = 0.02;
  r.walltime_ms = 1.5;
  r.comm_blocked_ms = 0.25;
  r.comm_fraction = 0.25 / 1.5;
  r.bytes_sent_total = 99;
  r.bytes_per_phase = {{"", 9}, {"approx/phase1", 90}};
  r.rows_scanned_per_node = {10, 11};
  std::ostringstream os;
  write_report_row(os, r);
  EXPECT_EQ(os.str(), "15,approx,2,0.02,1.500,0.250,0.167,99,main=9;approx/phase1=90,10;11\r\n");
}

TEST(RunSingle, SingleNodeMatchesOracle) {
  auto out = run_single(3, "lazy", 1, 0.005);
  auto db = tpch::generate_database({0.005, 1, 0, tpch::kDefaultSeed});
  EXPECT_EQ(out.result, queries::oracle::run(db, 3));
  EXPECT_EQ(out.report.rows_scanned_per_node.size(), 1u);
  EXPECT_EQ(out.report.bytes_sent_total, 0u);
}

TEST(RunSingle, AccountingInvariants) {
  auto a = run_single(21, "bitset", 4, 0.01);
  EXPECT_GE(a.report.comm_fraction, 0.0);
  EXPECT_LE(a.report.comm_fraction, 1.0);
  EXPECT_GT(a.report.bytes_sent_total, 0u);
  std::uint64_t by_phase = 0;
  for (const auto& [p, b] : a.report.bytes_per_phase) by_phase += b;
  EXPECT_EQ(by_phase, a.report.bytes_sent_total);
  auto b = run_single(21, "bitset", 4, 0.01);
  EXPECT_EQ(a.report.bytes_per_phase, b.report.bytes_per_phase);
  EXPECT_EQ(a.report.rows_scanned_per_node, b.report.rows_scanned_per_node);
}

TEST(RunSingle, UsageErrors) {
  EXPECT_THROW(run_single(99, "default", 2, 0.01), InvalidArgument);
  EXPECT_THROW(run_single(3, "default", 2, 0.01), InvalidArgument);
  EXPECT_THROW(run_single(1, "default", 0, 0.01), InvalidArgument);
  EXPECT_THROW(run_single(1, "default", 2, 0.0), InvalidArgument);
}

TEST(RunSingle, Q18TopHundred) {
  auto out = run_single(18, "default", 4, 0.01, queries::QueryParams{{"QUANTITY", "100"}});
  EXPECT_EQ(out.result.size(), 100u);
}

TEST(RunSingle, SeedChangesData) {
  RunOptions o;
  o.seed = 1234;
  auto a = run_single(1, "default", 2, 0.002);
  auto b = run_single(1, "default", 2, 0.002, {}, o);
  EXPECT_NE(a.result, b.result);
}

TEST(MemoryBudget, RefusesOversizedConfig) {
  ::setenv("OLAPNET_MEM_BUDGET_MB", "1", 1);
  try {
    run_weak_scaling(1, "default", 0.01, {1, 2}, 1);
    FAIL() << "expected refusal";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("budget"), std::string::npos);
  }
  ::unsetenv("OLAPNET_MEM_BUDGET_MB");
  EXPECT_GT(estimate_bytes(1.0), std::uint64_t{1} << 30);
  EXPECT_THROW(run_single(1, "default", 1, 100.0), InvalidArgument);
}

TEST(WeakScaling, ScannedRowsPerNodeFlatForScanQueries) {
  for (int q : {1, 4, 18}) {
    auto rows = run_weak_scaling(q, "default", 0.005, {1, 2, 4, 8}, 1);
    ASSERT_EQ(rows.size(), 4u);
    const double base = static_cast<double>(rows[0].rows_scanned_per_node[0]);
    for (const auto& r : rows) {
      EXPECT_DOUBLE_EQ(r.sf, 0.005 * r.P);
      ASSERT_EQ(r.rows_scanned_per_node.size(), static_cast<std::size_t>(r.P));
      for (auto n : r.rows_scanned_per_node) EXPECT_NEAR(static_cast<double>(n) / base, 1.0, 0.02) << "q" << q;
    }
  }
}

TEST(WeakScaling, RepeatsAgreeOnBytes) {
  auto rows = run_weak_scaling(15, "approx", 0.005, {2, 4}, 3);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_GT(rows[1].bytes_sent_total, 0u);
  EXPECT_THROW(run_weak_scaling(15, "approx", 0.005, {2}, 0), InvalidArgument);
}

TEST(WeakScaling, Q15ApproxVersusNaivePhaseOne) {
  auto naive = run_single(15, "naive", 8, 0.08).report;
  auto approx = run_single(15, "approx", 8, 0.08).report;
  const double ratio = static_cast<double>(naive.bytes_per_phase.at("naive/phase1")) /
                       static_cast<double>(approx.bytes_per_phase.at("approx/phase1"));
  EXPECT_GT(ratio, 6.0);
  EXPECT_LE(ratio, 8.0);
}

TEST(Verify, DefaultConfigPasses) {
  auto s = verify_all(0.005, {1, 2, 3});
  EXPECT_TRUE(s.passed()) << (s.failures.empty() ? "" : s.failures.front());
  EXPECT_EQ(s.checks, 3 * 17 * 2);
  EXPECT_TRUE(s.warnings.empty());
}

TEST(Verify, InjectedTieBreakFaultFails) {
  VerifyOptions o;
  o.fault = Fault::FlipTieBreak;
  auto s = verify_all(0.005, {2}, o);
  EXPECT_FALSE(s.passed());
}

TEST(Verify, EmptyNodeListPassesWithWarning) {
  auto s = verify_all(0.01, {});
  EXPECT_TRUE(s.passed());
  EXPECT_EQ(s.checks, 0);
  ASSERT_EQ(s.warnings.size(), 1u);
}
