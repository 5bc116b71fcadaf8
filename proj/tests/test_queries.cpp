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

#include <cctype>
#include <random>
#include <sstream>

#include "olapnet/queries.hpp"

using namespace olapnet;
using namespace olapnet::queries;

namespace {

/// Generated databases cached per (sf, P).
const std::vector<Database>& cluster_db(double sf, int P) {
  static std::map<std::pair<double, int>, std::vector<Database>> cache;
  auto& v = cache[{sf, P}];
  if (v.empty())
    for (int r = 0; r < P; ++r) v.push_back(tpch::generate_database({sf, P, r, tpch::kDefaultSeed}));
  return v;
}

const Database& single_db(double sf) { return cluster_db(sf, 1)[0]; }

QueryResult run_dist(double sf, int P, int q, const std::string& variant, const QueryParams& params = {}) {
  auto dbs = cluster_db(sf, P);  // prepare adds replicated columns: work on a copy
  QueryResult out;
  run_cluster(P, [&](ClusterCtx& ctx) {
    auto& db = dbs[static_cast<std::size_t>(ctx.rank())];
    prepare(ctx, db, q, variant);
    auto r = run_query(ctx, db, q, variant, params);
    if (ctx.rank() == 0)
      out = std::move(r);
    else
      EXPECT_EQ(r.size(), 0u);
  });
  return out;
}

struct Case {
  int query;
  std::string variant;
  int P;
};

std::vector<Case> all_cases() {
  std::vector<Case> c;
  for (int P : {1, 2, 4, 8})
    for (int q : kQueryIds)
      for (const auto& v : variants(q)) c.push_back({q, v, P});
  return c;
}

}  // namespace

class OracleEquality : public ::testing::TestWithParam<Case> {};

TEST_P(OracleEquality, DistributedEqualsOracle) {
  const auto& c = GetParam();
  auto want = oracle::run(single_db(0.01), c.query);
  auto got = run_dist(0.01, c.P, c.query, c.variant);
  EXPECT_EQ(got, want) << first_difference(got, want);
  EXPECT_EQ(got.columns, want.columns);
}

INSTANTIATE_TEST_SUITE_P(AllPlans, OracleEquality, ::testing::ValuesIn(all_cases()), [](const auto& info) {
  return "Q" + std::to_string(info.param.query) + "_" + info.param.variant + "_P" + std::to_string(info.param.P);
});

TEST(ResultShape, RowBounds) {
  const auto& db = single_db(0.01);
  EXPECT_LE(oracle::run(db, 1).size(), 6u);
  EXPECT_LE(oracle::run(db, 3).size(), 10u);
  EXPECT_LE(oracle::run(db, 4).size(), 5u);
  EXPECT_LE(oracle::run(db, 5).size(), 5u);
  EXPECT_EQ(oracle::run(db, 14).size(), 1u);
  EXPECT_LE(oracle::run(db, 2).size(), 100u);
  EXPECT_LE(oracle::run(db, 18, {{"QUANTITY", "100"}}).size(), 100u);
  EXPECT_EQ(oracle::run(db, 18, {{"QUANTITY", "100"}}).size(), 100u);
  EXPECT_LE(oracle::run(db, 21).size(), 100u);
}

struct EmptyCase {
  int query;
  QueryParams params;
  std::size_t rows;
};

class EmptySelection : public ::testing::TestWithParam<EmptyCase> {};

std::string empty_case_name(const ::testing::TestParamInfo<EmptyCase>& info) {
  const auto& kv = *info.param.params.items().begin();
  std::string name = "Q" + std::to_string(info.param.query) + "_" + kv.first;
  for (char ch : kv.second)
    if (std::isalnum(static_cast<unsigned char>(ch))) name += ch;
  return name;
}

TEST_P(EmptySelection, GivesEmptyOrZeroResult) {
  const auto& c = GetParam();
  for (const auto& v : variants(c.query)) {
    auto got = run_dist(0.01, 4, c.query, v, c.params);
    EXPECT_EQ(got.size(), c.rows) << v;
    EXPECT_EQ(got, oracle::run(single_db(0.01), c.query, c.params)) << v;
  }
}

INSTANTIATE_TEST_SUITE_P(
    Queries, EmptySelection,
    ::testing::Values(EmptyCase{1, {{"DELTA", "3000"}}, 0}, EmptyCase{2, {{"SIZE", "99"}}, 0},
                      EmptyCase{2, {{"TYPE", "NOSUCHMETAL"}}, 0}, EmptyCase{3, {{"DATE", "1980-01-01"}}, 0},
                      EmptyCase{4, {{"DATE", "1980-01-01"}}, 0}, EmptyCase{5, {{"REGION", "ATLANTIS"}}, 0},
                      EmptyCase{11, {{"NATION", "ATLANTIS"}}, 0}, EmptyCase{14, {{"DATE", "1980-01-01"}}, 1},
                      EmptyCase{15, {{"DATE", "1980-01-01"}}, 0}, EmptyCase{18, {{"QUANTITY", "100000"}}, 0},
                      EmptyCase{21, {{"NATION", "ATLANTIS"}}, 0}),
    empty_case_name);

TEST(Q14, EmptyWindowRendersZero) {
  auto r = run_dist(0.01, 2, 14, "default", {{"DATE", "1980-01-01"}});
  EXPECT_EQ(r.to_csv(), "promo_revenue\r\n0.00\r\n");
}

TEST(Q11, EveryValueAboveThreshold) {
  const auto& db = single_db(0.01);
  auto r = run_dist(0.01, 4, 11, "default");
  ASSERT_GT(r.size(), 0u);
  // total value of the nation's stock, recomputed here
  std::int64_t nk = nation_key(db, "GERMANY"), total = 0;
  const auto& sn = db.supplier.col("s_nationkey");
  const auto& ps_s = db.partsupp.col("ps_suppkey");
  for (std::size_t i = 0; i < ps_s.size(); ++i)
    if (sn[static_cast<std::size_t>(ps_s[i] - 1)] == nk)
      total += db.partsupp.col("ps_supplycost")[i] * db.partsupp.col("ps_availqty")[i];
  auto frac = q11_fraction({}, 0.01);
  for (const auto& row : r.rows) {
    const auto& m = std::get<Money>(row[1]);
    EXPECT_GT(static_cast<i128>(m.units) * frac.den, static_cast<i128>(total) * frac.num);
  }
}

TEST(Q11, FractionOverride) {
  for (const char* den : {"10", "1000", "1000000"}) {
    QueryParams p{{"FRACTION_DEN", den}};
    EXPECT_EQ(run_dist(0.01, 3, 11, "default", p), oracle::run(single_db(0.01), 11, p)) << den;
  }
}

TEST(Q13, HistogramConservesCustomers) {
  for (const char* w : {"special", "zzzz"}) {
    QueryParams p{{"WORD1", w}};
    auto r = run_dist(0.01, 4, 13, "default", p);
    std::int64_t customers = 0;
    for (const auto& row : r.rows) customers += std::get<std::int64_t>(row[1]);
    EXPECT_EQ(customers, tpch::cardinalities(0.01).customer);
    EXPECT_EQ(r, oracle::run(single_db(0.01), 13, p));
  }
}

TEST(Q15, SingleSupplierDatabase) {
  const double sf = 0.00001;
  ASSERT_EQ(tpch::cardinalities(sf).supplier, 1);
  auto want = oracle::run(single_db(sf), 15);
  for (const auto& v : variants(15)) {
    auto got = run_dist(sf, 2, 15, v);
    EXPECT_EQ(got, want) << v;
    ASSERT_EQ(got.size(), 1u);
    EXPECT_EQ(std::get<std::int64_t>(got.rows[0][0]), 1);
  }
}

TEST(Q15, ApproxSendsEightBitCodes) {
  const int P = 8;
  std::map<std::string, std::uint64_t> value_bytes;
  auto dbs = cluster_db(0.01, P);
  for (const auto& v : {"naive", "approx"}) {
    auto stats = run_cluster(P, [&](ClusterCtx& ctx) { run_query(ctx, dbs[static_cast<std::size_t>(ctx.rank())], 15, v); });
    for (const auto& s : stats)
      for (const auto& [k, n] : s.counters)
        if (k.ends_with("phase1_value_bytes")) value_bytes[v] += n;
  }
  // one doubling step at most at this size: equal number of exchanges
  EXPECT_EQ(value_bytes["naive"], 8 * value_bytes["approx"]);
}

TEST(CrossVariant, RandomParameters) {
  std::mt19937_64 rng(17);
  const auto& nations = *tpch::nation_names();
  const auto& segs = *tpch::segments();
  for (int t = 0; t < 6; ++t) {
    const int P = std::array{2, 3, 4}[t % 3];
    auto day = date::format(tpch::kStartDate + static_cast<std::int64_t>(rng() % 2400));
    QueryParams p3{{"SEGMENT", segs[rng() % segs.size()]}, {"DATE", day}};
    QueryParams p21{{"NATION", nations[rng() % nations.size()]}};
    QueryParams p15{{"DATE", day}};
    for (auto [q, p] : {std::pair{3, p3}, std::pair{21, p21}, std::pair{15, p15}}) {
      auto want = oracle::run(single_db(0.01), q, p);
      for (const auto& v : variants(q)) EXPECT_EQ(run_dist(0.01, P, q, v, p), want) << "q" << q << " " << v;
    }
  }
}

TEST(Q18, LowerThresholdMatchesOracle) {
  QueryParams p{{"QUANTITY", "150"}};
  auto want = oracle::run(single_db(0.01), 18, p);
  EXPECT_GT(want.size(), 0u);
  EXPECT_EQ(run_dist(0.01, 8, 18, "default", p), want);
}

TEST(Params, ParsingAndValidation) {
  auto p = QueryParams::parse("DATE=1995-01-01,SEGMENT=MACHINERY");
  EXPECT_EQ(p.str("SEGMENT", ""), "MACHINERY");
  EXPECT_EQ(p.day("DATE", "1990-01-01"), date::from_ymd(1995, 1, 1));
  EXPECT_TRUE(QueryParams::parse("").items().empty());
  EXPECT_THROW(QueryParams::parse("noequals"), InvalidArgument);
  EXPECT_THROW(QueryParams::parse("=x"), InvalidArgument);
  EXPECT_THROW(QueryParams::parse("N=12x").integer("N", 0), InvalidArgument);
  EXPECT_THROW(run_dist(0.001, 1, 3, "bitset", {{"BOGUS", "1"}}), InvalidArgument);
  EXPECT_THROW(run_dist(0.001, 1, 3, "naive", {}), InvalidArgument);
  EXPECT_THROW(variants(6), InvalidArgument);
  EXPECT_THROW(oracle::run(single_db(0.001), 22), InvalidArgument);
  EXPECT_THROW(oracle::run(cluster_db(0.001, 2)[0], 1), InvalidArgument);
}

TEST(Params, ReplicatedInputsRequirePrepare) {
  auto db = cluster_db(0.001, 2);
  EXPECT_THROW(run_cluster(2, [&](ClusterCtx& ctx) { run_query(ctx, db[static_cast<std::size_t>(ctx.rank())], 3, "repl_attr"); }),
               InvalidArgument);
}

TEST(Values, Rendering) {
  EXPECT_EQ(render(Money{123456, 2}), "1234.56");
  EXPECT_EQ(render(Money{-5, 2}), "-0.05");
  EXPECT_EQ(render(Money{125, 4}), "0.01");
  EXPECT_EQ(render(Money{-125, 4}), "-0.01");
  EXPECT_EQ(render(Money{124, 4}), "0.01");
  EXPECT_EQ(render(Money{-49, 4}), "0.00");
  EXPECT_EQ(render(Ratio{1, 3}), "0.33");
  EXPECT_EQ(render(Ratio{2, 3}), "0.67");
  EXPECT_EQ(render(Ratio{1, 0}), "0.00");
  EXPECT_EQ(render(DateValue{date::from_ymd(1996, 2, 29)}), "1996-02-29");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  QueryResult r{{"x", "y"}, {{std::int64_t{1}, std::string("p,q")}}};
  EXPECT_EQ(r.to_csv(), "x,y\r\n1,\"p,q\"\r\n");
  QueryResult s = r;
  s.rows[0][0] = std::int64_t{2};
  EXPECT_NE(r, s);
  EXPECT_NE(first_difference(s, r).find("line 2"), std::string::npos);
}
