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

#include <random>

#include "olapnet/distops.hpp"

using namespace olapnet;
using namespace olapnet::dist;

namespace {

/// Deterministic pseudo-random predicate over global rows.
bool pred(std::uint64_t seed, std::int64_t row) { return (static_cast<std::uint64_t>(row) * 2654435761u + seed) % 3 == 0; }

Aggregation random_aggregation(std::mt19937_64& rng, std::size_t keys, int P, int node, bool sum_of_uniforms) {
  Aggregation a{std::vector<std::uint64_t>(keys), PartitionLayout::even(static_cast<std::int64_t>(keys), P)};
  std::mt19937_64 local(rng() + static_cast<std::uint64_t>(node));
  for (auto& v : a.partial) {
    if (sum_of_uniforms) {
      v = 0;
      for (int i = 0; i < 4; ++i) v += local() % 100000;
    } else {
      v = local() % 1000000;
    }
  }
  return a;
}

}  // namespace

TEST(GroupByOwner, SortsAndDeduplicates) {
  auto l = PartitionLayout::even(10, 2);
  std::vector<std::int64_t> rows = {7, 1, 7, 0, 9, 1};
  auto g = group_by_owner(rows, l);
  EXPECT_EQ(g[0], (std::vector<std::uint64_t>{0, 1}));
  EXPECT_EQ(g[1], (std::vector<std::uint64_t>{7, 9}));
}

TEST(RemoteFilter, MatchesDirectEvaluation) {
  std::mt19937_64 rng(1);
  for (int P : {1, 2, 3, 4, 8}) {
    const std::int64_t m = 500;
    auto layout = PartitionLayout::even(m, P);
    std::vector<std::vector<std::int64_t>> wanted(static_cast<std::size_t>(P));
    for (auto& w : wanted)
      for (int i = 0; i < 100; ++i) w.push_back(static_cast<std::int64_t>(rng() % m));
    run_cluster(P, [&](ClusterCtx& ctx) {
      const auto& rows = wanted[static_cast<std::size_t>(ctx.rank())];
      auto ans = remote_filter_request(ctx, group_by_owner(rows, layout), layout, [&](std::int64_t r) {
        EXPECT_EQ(layout.owner(r), ctx.rank());
        return pred(7, r);
      });
      for (auto r : rows) EXPECT_EQ(ans.passes(r, layout.owner(r)), pred(7, r));
      EXPECT_THROW(ans.passes(m + 5, 0), InvalidArgument);
    });
  }
}

TEST(RemoteFilter, ZeroKeysSendOnlyHeaders) {
  auto layout = PartitionLayout::even(100, 4);
  auto stats = run_cluster(4, [&](ClusterCtx& ctx) {
    auto ans = remote_filter_request(ctx, std::vector<std::vector<std::uint64_t>>(4), layout, [](std::int64_t) { return true; });
    EXPECT_EQ(ans.requested(), 0u);
  });
  // empty requests, then one sparse-bitset header per reply (tag + length)
  for (const auto& s : stats) EXPECT_EQ(s.bytes_sent, 3u * 2u);
}

TEST(RemoteFilter, ForeignKeyRequestIsProtocolError) {
  auto layout = PartitionLayout::even(100, 2);
  EXPECT_THROW(run_cluster(2,
                           [&](ClusterCtx& ctx) {
                             std::vector<std::vector<std::uint64_t>> k(2);
                             k[1] = {3};  // owned by node 0, sent to node 1
                             remote_filter_request(ctx, k, layout, [](std::int64_t) { return true; });
                           }),
               ProtocolError);
}

TEST(RemoteAttribute, MatchesDirectLookup) {
  std::mt19937_64 rng(2);
  for (int P : {1, 2, 5}) {
    auto layout = PartitionLayout::even(300, P);
    run_cluster(P, [&](ClusterCtx& ctx) {
      std::vector<std::int64_t> rows;
      std::mt19937_64 r(static_cast<std::uint64_t>(ctx.rank()) + 99);
      for (int i = 0; i < 50; ++i) rows.push_back(static_cast<std::int64_t>(r() % 300));
      auto ans = remote_attribute_request(ctx, group_by_owner(rows, layout), layout, [](std::int64_t g) { return -3 * g + 1; });
      for (auto g : rows) EXPECT_EQ(ans.value(g, layout.owner(g)), -3 * g + 1);
    });
  }
}

TEST(Replicate, ConcatenationInNodeOrder) {
  for (int P : {1, 2, 3, 7}) {
    auto layout = PartitionLayout::even(1000, P);
    codec::Bitset want(1000);
    for (std::int64_t g = 0; g < 1000; ++g)
      if (pred(3, g)) want.set(static_cast<std::size_t>(g));
    run_cluster(P, [&](ClusterCtx& ctx) {
      ColumnTable t("t", layout.info(ctx.rank()));
      const auto first = layout.range(ctx.rank()).first;
      auto got = remote_filter_replicate(ctx, t, [&](std::size_t i) { return pred(3, first + static_cast<std::int64_t>(i)); });
      EXPECT_EQ(got, want);
      auto none = remote_filter_replicate(ctx, t, [](std::size_t) { return false; });
      EXPECT_EQ(none.count(), 0u);
      EXPECT_EQ(none.size(), 1000u);
    });
  }
}

TEST(FilterCost, WorkedExamples) {
  auto a = estimate_filter_bits({1024, 4096, 8, 0.5});
  ASSERT_TRUE(a.alt1_bits);
  EXPECT_NEAR(*a.alt1_bits, 640.0, 1e-6);
  EXPECT_NEAR(a.alt2_bits, 2048.0, 1e-6);
  EXPECT_EQ(a.choice, FilterChoice::RequestResponse);

  auto b = estimate_filter_bits({1024, 4096, 8, 0.01});
  EXPECT_NEAR(b.alt2_bits, 0.01 * 4096 * std::log2(100.0), 1e-9);
  EXPECT_NEAR(b.alt2_bits, 272.2, 0.1);
  EXPECT_EQ(b.choice, FilterChoice::Replicate);

  auto c = estimate_filter_bits({1024, 4096, 8, 1.0});
  EXPECT_EQ(c.alt2_bits, 0.0);
  EXPECT_EQ(c.choice, FilterChoice::Replicate);

  EXPECT_THROW(estimate_filter_bits({1, 10, 0, 0.5}), InvalidArgument);
  EXPECT_THROW(estimate_filter_bits({1, 10, 2, 1.5}), InvalidArgument);
}

TEST(FilterCost, ChoiceInvariantUnderScaling) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 200; ++t) {
    FilterCostInputs c{static_cast<double>(1 + rng() % 5000), static_cast<double>(1 + rng() % 100000),
                       1 + static_cast<int>(rng() % 16), static_cast<double>(rng() % 1000) / 1000.0};
    auto e = estimate_filter_bits(c);
    const double s = 1 / std::log2(std::exp(1.0));  // bits to nats
    const bool alt1 = e.alt1_bits && *e.alt1_bits * s <= e.alt2_bits * s;
    EXPECT_EQ(alt1, e.choice == FilterChoice::RequestResponse);
  }
}

TEST(TopK, TwoListMerge) {
  std::vector<TopKEntry> a = {{1, 9, {}}, {2, 7, {}}, {3, 5, {}}};
  std::vector<TopKEntry> b = {{4, 8, {}}, {5, 6, {}}, {6, 4, {}}};
  auto m = merge_topk(a, b, 3, topk_before);
  ASSERT_EQ(m.size(), 3u);
  EXPECT_EQ(m[0].value, 9);
  EXPECT_EQ(m[1].value, 8);
  EXPECT_EQ(m[2].value, 7);

  TopKList got;
  run_cluster(2, [&](ClusterCtx& ctx) {
    auto r = global_topk(ctx, TopKList::from(ctx.rank() == 0 ? a : b, 3), 3);
    if (ctx.rank() == 0) got = r;
  });
  EXPECT_EQ(got.entries, m);
}

TEST(TopK, TiesBrokenByKey) {
  std::vector<TopKEntry> e = {{5, 1, {}}, {2, 1, {}}, {9, 3, {}}};
  auto l = TopKList::from(e, 2);
  EXPECT_EQ(l.entries[0].key, 9);
  EXPECT_EQ(l.entries[1].key, 2);
}

TEST(TopK, SingleNodeUnchanged) {
  auto l = TopKList::from({{1, 4, {}}, {2, 3, {}}}, 5);
  run_cluster(1, [&](ClusterCtx& ctx) { EXPECT_EQ(global_topk(ctx, l, 5), l); });
}

TEST(TopK, RandomVsSortedConcatenation) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 40; ++t) {
    const int P = 1 + static_cast<int>(rng() % 8);
    const std::size_t k = 1 + rng() % 20;
    std::vector<std::vector<TopKEntry>> parts(static_cast<std::size_t>(P));
    std::vector<TopKEntry> all;
    for (int r = 0; r < P; ++r)
      for (int i = 0; i < 30; ++i) {
        TopKEntry e{r * 1000 + i, static_cast<std::int64_t>(rng() % 20), {}};
        parts[static_cast<std::size_t>(r)].push_back(e);
        all.push_back(e);
      }
    std::sort(all.begin(), all.end(), topk_before);
    all.resize(std::min(k, all.size()));
    TopKList got;
    run_cluster(P, [&](ClusterCtx& ctx) {
      auto r = global_topk(ctx, TopKList::from(parts[static_cast<std::size_t>(ctx.rank())], k), k);
      if (ctx.rank() == 0) got = r;
    });
    EXPECT_EQ(got.entries, all);
  }
}

TEST(TopK, DifferentKIsProtocolError) {
  EXPECT_THROW(run_cluster(2, [](ClusterCtx& ctx) { const std::size_t k = 1 + static_cast<std::size_t>(ctx.rank());
    global_topk(ctx, TopKList{k, {}}, k); }),
               ProtocolError);
}

namespace {

struct Cand {
  std::int64_t row;
  std::int64_t value;
};

}  // namespace

TEST(LazyFilter, HandSimulatedExample) {
  // keys a..f = rows 0..5 with values 10..5; predicate passes b, d, f
  std::vector<Cand> c;
  for (int i = 0; i < 6; ++i) c.push_back({i, 10 - i});
  auto layout = PartitionLayout::even(6, 1);
  run_cluster(1, [&](ClusterCtx& ctx) {
    auto r = lazy_topk_filter<Cand>(ctx, c, [](const Cand& x) { return x.row; }, [](const Cand& x) { return x.value; },
                                    layout, [](std::int64_t row) { return row % 2 == 1; }, {2, 2, 0});
    ASSERT_EQ(r.survivors.size(), 2u);
    EXPECT_EQ(r.survivors[0].row, 1);
    EXPECT_EQ(r.survivors[0].value, 9);
    EXPECT_EQ(r.survivors[1].row, 3);
    EXPECT_EQ(r.survivors[1].value, 7);
    EXPECT_EQ(r.keys_requested, 4u);
    EXPECT_EQ(r.rounds, 2);
  });
}

TEST(LazyFilter, AllPassAndNonePass) {
  std::vector<Cand> c;
  for (int i = 0; i < 100; ++i) c.push_back({i, 1000 - i});
  auto layout = PartitionLayout::even(100, 1);
  run_cluster(1, [&](ClusterCtx& ctx) {
    auto row = [](const Cand& x) { return x.row; };
    auto val = [](const Cand& x) { return x.value; };
    auto all = lazy_topk_filter<Cand>(ctx, c, row, val, layout, [](std::int64_t) { return true; }, {7, 3, 0});
    EXPECT_EQ(all.keys_requested, 9u);  // ceil(7/3)*3
    EXPECT_EQ(all.survivors.size(), 7u);
    auto none = lazy_topk_filter<Cand>(ctx, c, row, val, layout, [](std::int64_t) { return false; }, {7, 3, 0});
    EXPECT_EQ(none.keys_requested, 100u);
    EXPECT_TRUE(none.survivors.empty());
    auto dflt = lazy_topk_filter<Cand>(ctx, c, row, val, layout, [](std::int64_t) { return true; }, {7, 0, 0});
    EXPECT_EQ(dflt.keys_requested, 64u);
  });
}

TEST(LazyFilter, UnevenNodesKeepCollectiveInStep) {
  auto layout = PartitionLayout::even(1000, 3);
  run_cluster(3, [&](ClusterCtx& ctx) {
    std::vector<Cand> c;
    for (int i = 0; i < 200 * (ctx.rank() + 1); i += 1) c.push_back({(i * 7 + ctx.rank()) % 1000, 5000 - i});
    auto r = lazy_topk_filter<Cand>(ctx, c, [](const Cand& x) { return x.row; }, [](const Cand& x) { return x.value; },
                                    layout, [](std::int64_t row) { return row % 10 == 0; }, {5, 8, 2});
    EXPECT_LE(r.survivors.size(), 5u);
    for (const auto& s : r.survivors) EXPECT_EQ(s.row % 10, 0);
  });
}

TEST(PartialSums, WorkedExample) {
  std::vector<std::uint64_t> v = {12, 5};
  auto e = encode_partial_sums(std::span<const std::uint64_t>(v), 3, 2);
  ASSERT_EQ(e.groups.size(), 1u);
  EXPECT_EQ(e.groups[0].offset, 3);
  EXPECT_EQ(e.groups[0].codes, (std::vector<std::uint64_t>{6, 2}));
  EXPECT_EQ(e.lower(0), 12u);
  EXPECT_EQ(e.upper(0), 13u);
  EXPECT_EQ(e.lower(1), 4u);
  EXPECT_EQ(e.upper(1), 5u);
}

TEST(PartialSums, ZerosAndWideWindow) {
  std::vector<std::uint64_t> z = {0, 0, 0};
  auto e = encode_partial_sums(std::span<const std::uint64_t>(z), 8, 3);
  EXPECT_EQ(e.groups[0].offset, -1);
  std::vector<std::uint64_t> v = {200, 3, 255};
  auto w = encode_partial_sums(std::span<const std::uint64_t>(v), 8, 3);
  for (std::size_t i = 0; i < v.size(); ++i) {
    EXPECT_EQ(w.lower(i), v[i]);
    EXPECT_EQ(w.upper(i), v[i]);
  }
  std::vector<std::int64_t> neg = {-1};
  EXPECT_THROW(encode_partial_sums(std::span<const std::int64_t>(neg)), InvalidArgument);
  EXPECT_THROW(encode_partial_sums(std::span<const std::uint64_t>(v), 0), InvalidArgument);
}

TEST(PartialSums, TruncatedPayloadRejected) {
  std::vector<std::uint64_t> v(100, 77);
  auto b = encode_partial_sums(std::span<const std::uint64_t>(v), 8, 16).serialize();
  b.pop_back();
  EXPECT_THROW(EncodedPartialSums::deserialize(b, 100), DecodeError);
}

TEST(ApproxTopk, EqualsNaiveOnRandomInstances) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 12; ++t) {
    const int P = std::array{2, 4, 8}[t % 3];
    const std::size_t keys = 500 + rng() % 3000, k = 1 + rng() % 20;
    const bool sou = t % 2;
    const auto seed = rng();
    std::vector<TopKList> naive(2), approx(2);
    run_cluster(P, [&](ClusterCtx& ctx) {
      std::mt19937_64 r(seed);
      auto agg = random_aggregation(r, keys, P, ctx.rank(), sou);
      auto a = approx_topk_sum(ctx, agg, k);
      auto n = naive_topk_sum(ctx, agg, k, true);
      auto d = naive_topk_sum(ctx, agg, k, false);
      if (ctx.rank() == 0) {
        approx[0] = a.top;
        naive[0] = n.top;
        naive[1] = d.top;
      }
    });
    EXPECT_EQ(approx[0], naive[0]) << "t=" << t;
    EXPECT_EQ(naive[1], naive[0]);
    EXPECT_EQ(approx[0].entries.size(), k);
  }
}

TEST(ApproxTopk, BoundWidthMatchesPerSourceEncoding) {
  const int P = 4;
  const std::size_t keys = 3000;
  std::mt19937_64 rng(17);
  const auto seed = rng();
  std::vector<std::uint64_t> width(P, 0);
  run_cluster(P, [&](ClusterCtx& ctx) {
    std::mt19937_64 r(seed);
    auto agg = random_aggregation(r, keys, P, ctx.rank(), true);
    width[static_cast<std::size_t>(ctx.rank())] = approx_topk_sum(ctx, agg, 10).volume.bound_width_sum;
  });
  const auto layout = PartitionLayout::even(static_cast<std::int64_t>(keys), P);
  for (int owner = 0; owner < P; ++owner) {
    const auto& range = layout.range(owner);
    std::uint64_t want = 0;
    for (int src = 0; src < P; ++src) {
      std::mt19937_64 r(seed);
      auto agg = random_aggregation(r, keys, P, src, true);
      std::vector<std::uint64_t> part(agg.partial.begin() + range.first, agg.partial.begin() + range.end());
      auto e = encode_partial_sums(std::span<const std::uint64_t>(part));
      for (std::size_t i = 0; i < part.size(); ++i) want += e.upper(i) - e.lower(i);
    }
    EXPECT_EQ(width[static_cast<std::size_t>(owner)], want) << "owner " << owner;
  }
}

TEST(ApproxTopk, SingleNodeFetchesNothing) {
  std::mt19937_64 rng(5);
  run_cluster(1, [&](ClusterCtx& ctx) {
    auto agg = random_aggregation(rng, 1000, 1, 0, false);
    auto r = approx_topk_sum(ctx, agg, 5);
    EXPECT_EQ(r.volume.phase5_bytes, 0u);
    std::vector<TopKEntry> all;
    for (std::size_t i = 0; i < agg.partial.size(); ++i)
      all.push_back({static_cast<std::int64_t>(i), static_cast<std::int64_t>(agg.partial[i]), {}});
    EXPECT_EQ(r.top, TopKList::from(all, 5));
  });
}

TEST(ApproxTopk, EqualSumsPruneNothing) {
  run_cluster(4, [](ClusterCtx& ctx) {
    Aggregation agg{std::vector<std::uint64_t>(400, 1000003), PartitionLayout::even(400, 4)};
    auto r = approx_topk_sum(ctx, agg, 10);
    EXPECT_EQ(r.volume.keys_pruned, 0u);
    EXPECT_EQ(r.volume.keys_fetched, 100u);
    if (ctx.rank() == 0) {
      ASSERT_EQ(r.top.entries.size(), 10u);
      for (std::size_t i = 0; i < 10; ++i) {
        EXPECT_EQ(r.top.entries[i].key, static_cast<std::int64_t>(i));
        EXPECT_EQ(r.top.entries[i].value, 4 * 1000003);
      }
    }
  });
}

TEST(ApproxTopk, FewerKeysThanK) {
  run_cluster(3, [](ClusterCtx& ctx) {
    Aggregation agg{{5, 0, 9, 1}, PartitionLayout::even(4, 3)};
    auto r = approx_topk_sum(ctx, agg, 10);
    auto n = naive_topk_sum(ctx, agg, 10, true);
    if (ctx.rank() == 0) {
      EXPECT_EQ(r.top, n.top);
      EXPECT_EQ(r.top.entries.size(), 4u);
    }
  });
}

TEST(LateMaterialize, MatchesDirectLookup) {
  for (int P : {1, 2, 4}) {
    auto layout = PartitionLayout::even(50, P);
    std::vector<std::int64_t> keys = {49, 3, 17, 3, 0};
    run_cluster(P, [&](ClusterCtx& ctx) {
      auto rows = late_materialize(ctx, ctx.rank() == 0 ? std::span<const std::int64_t>(keys) : std::span<const std::int64_t>(),
                                   layout, [&](std::int64_t g) {
                                     EXPECT_EQ(layout.owner(g), ctx.rank());
                                     return std::vector<AttrValue>{g * 10, "row" + std::to_string(g)};
                                   });
      if (ctx.rank() != 0) return;
      ASSERT_EQ(rows.size(), keys.size());
      for (std::size_t i = 0; i < keys.size(); ++i) {
        EXPECT_EQ(std::get<std::int64_t>(rows[i][0]), keys[i] * 10);
        EXPECT_EQ(std::get<std::string>(rows[i][1]), "row" + std::to_string(keys[i]));
      }
    });
  }
}

TEST(LateMaterialize, ZeroKeys) {
  auto layout = PartitionLayout::even(10, 2);
  run_cluster(2, [&](ClusterCtx& ctx) {
    auto rows = late_materialize(ctx, {}, layout, [](std::int64_t) { return std::vector<AttrValue>{}; });
    EXPECT_TRUE(rows.empty());
  });
}
