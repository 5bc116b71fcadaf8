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

#include <atomic>
#include <random>
#include <set>
#include <thread>

#include "olapnet/cluster.hpp"
#include "olapnet/distops.hpp"

using namespace olapnet;

namespace {

Bytes payload_for(std::uint64_t seed, int src, int dst) {
  std::mt19937_64 rng(seed * 1000003 + static_cast<std::uint64_t>(src) * 131 + static_cast<std::uint64_t>(dst));
  Bytes b(rng() % 40);
  for (auto& x : b) x = static_cast<std::uint8_t>(rng());
  return b;
}

Bytes byte_of(int v) { return Bytes{static_cast<std::uint8_t>(v)}; }

}  // namespace

TEST(OneFactor, EveryPairExactlyOnce) {
  for (int P = 1; P <= 17; ++P) {
    std::map<std::pair<int, int>, int> seen;
    for (int round = 0; round < one_factor_rounds(P); ++round) {
      for (int u = 0; u < P; ++u) {
        int v = one_factor_partner(P, round, u);
        ASSERT_GE(v, 0);
        ASSERT_LT(v, P);
        ASSERT_EQ(one_factor_partner(P, round, v), u) << "P=" << P << " round=" << round;
        if (u < v) ++seen[{u, v}];
      }
    }
    ASSERT_EQ(seen.size(), static_cast<std::size_t>(P * (P - 1) / 2)) << "P=" << P;
    for (const auto& [pair, n] : seen) ASSERT_EQ(n, 1) << "P=" << P;
  }
}

TEST(OneFactor, OddFormula) {
  for (int P : {1, 3, 5, 7, 9, 15})
    for (int i = 0; i < P; ++i)
      for (int u = 0; u < P; ++u) EXPECT_EQ(one_factor_partner(P, i, u), ((i - u) % P + P) % P);
}

TEST(Barrier, StaggeredEntry) {
  const int P = 8;
  std::atomic<int> entered{0};
  std::vector<int> seen_at_exit(P);
  run_cluster(P, [&](ClusterCtx& ctx) {
    std::this_thread::sleep_for(std::chrono::milliseconds(3 * ctx.rank()));
    ++entered;
    ctx.barrier();
    seen_at_exit[static_cast<std::size_t>(ctx.rank())] = entered.load();
  });
  for (int v : seen_at_exit) EXPECT_EQ(v, P);
}

TEST(Collectives, SingleNodeIsIdentity) {
  auto stats = run_cluster(1, [](ClusterCtx& ctx) {
    ctx.barrier();
    EXPECT_EQ(ctx.gather(byte_of(7), 0), std::vector<Bytes>{byte_of(7)});
    EXPECT_EQ(ctx.allgather(byte_of(8)), std::vector<Bytes>{byte_of(8)});
    EXPECT_EQ(ctx.scatter({byte_of(9)}, 0), byte_of(9));
    EXPECT_EQ(ctx.broadcast(byte_of(1), 0), byte_of(1));
    EXPECT_EQ(ctx.all_to_all_1factor({byte_of(2)}), std::vector<Bytes>{byte_of(2)});
    EXPECT_EQ(*ctx.reduce(dist::encode_i64s(std::vector<std::int64_t>{5}), dist::sum_i64_op(), 0),
              dist::encode_i64s(std::vector<std::int64_t>{5}));
  });
  EXPECT_EQ(stats[0].bytes_sent, 0u);
}

TEST(Collectives, GatherNodeIds) {
  run_cluster(4, [](ClusterCtx& ctx) {
    auto g = ctx.gather(byte_of(ctx.rank()), 0);
    if (ctx.rank() == 0)
      EXPECT_EQ(g, (std::vector<Bytes>{byte_of(0), byte_of(1), byte_of(2), byte_of(3)}));
    else
      EXPECT_TRUE(g.empty());
  });
}

TEST(Collectives, AllgatherScatterBroadcast) {
  for (int P : {2, 3, 5, 8}) {
    run_cluster(P, [P](ClusterCtx& ctx) {
      auto all = ctx.allgather(payload_for(1, ctx.rank(), 0));
      ASSERT_EQ(all.size(), static_cast<std::size_t>(P));
      for (int s = 0; s < P; ++s) EXPECT_EQ(all[static_cast<std::size_t>(s)], payload_for(1, s, 0));

      std::vector<Bytes> parts;
      if (ctx.rank() == 1 % P)
        for (int d = 0; d < P; ++d) parts.push_back(payload_for(2, 0, d));
      EXPECT_EQ(ctx.scatter(parts, 1 % P), payload_for(2, 0, ctx.rank()));

      Bytes b = ctx.rank() == P - 1 ? payload_for(3, 9, 9) : Bytes{};
      EXPECT_EQ(ctx.broadcast(b, P - 1), payload_for(3, 9, 9));
    });
  }
}

TEST(Collectives, AllToAllMatchesPairwiseReference) {
  for (int P : {1, 2, 3, 4, 5, 6, 7, 8, 16}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      std::vector<std::vector<Bytes>> one(P), direct(P);
      auto stats = run_cluster(P, [&](ClusterCtx& ctx) {
        std::vector<Bytes> out;
        for (int d = 0; d < P; ++d) out.push_back(payload_for(seed, ctx.rank(), d));
        one[static_cast<std::size_t>(ctx.rank())] = ctx.all_to_all_1factor(out);
        direct[static_cast<std::size_t>(ctx.rank())] = ctx.all_to_all_direct(out);
      });
      std::uint64_t sent = 0, recv = 0;
      for (const auto& s : stats) {
        sent += s.bytes_sent;
        recv += s.bytes_received;
      }
      EXPECT_EQ(sent, recv);
      for (int r = 0; r < P; ++r)
        for (int s = 0; s < P; ++s) {
          ASSERT_EQ(one[static_cast<std::size_t>(r)][static_cast<std::size_t>(s)], payload_for(seed, s, r));
          ASSERT_EQ(direct[static_cast<std::size_t>(r)][static_cast<std::size_t>(s)], payload_for(seed, s, r));
        }
    }
  }
}

TEST(Collectives, EmptyPayloads) {
  run_cluster(3, [](ClusterCtx& ctx) {
    auto r = ctx.all_to_all_1factor(std::vector<Bytes>(3));
    for (const auto& b : r) EXPECT_TRUE(b.empty());
  });
}

TEST(Collectives, OnlyCrossNodeBytesCounted) {
  auto stats = run_cluster(4, [](ClusterCtx& ctx) {
    std::vector<Bytes> out(4);
    out[static_cast<std::size_t>(ctx.rank())] = Bytes(1000, 1);  // self only
    ctx.all_to_all_1factor(out);
  });
  for (const auto& s : stats) EXPECT_EQ(s.bytes_sent, 0u);
}

TEST(Reduce, SumOfIds) {
  run_cluster(4, [](ClusterCtx& ctx) {
    auto r = ctx.reduce(dist::encode_i64s(std::vector<std::int64_t>{ctx.rank()}), dist::sum_i64_op(), 0);
    if (ctx.rank() == 0) {
      ASSERT_TRUE(r);
      EXPECT_EQ(dist::decode_i64s(*r), std::vector<std::int64_t>{6});
    } else {
      EXPECT_FALSE(r);
    }
    auto all = dist::allreduce_sum(ctx, std::vector<std::int64_t>{1, ctx.rank()});
    EXPECT_EQ(all, (std::vector<std::int64_t>{4, 6}));
  });
}

TEST(Reduce, TopkMergeMatchesSequentialFold) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 30; ++t) {
    const int P = 1 + static_cast<int>(rng() % 9);
    const std::size_t k = 1 + rng() % 12;
    std::vector<dist::TopKList> locals;
    for (int r = 0; r < P; ++r) {
      std::vector<dist::TopKEntry> e;
      for (int i = 0; i < 15; ++i) e.push_back({r * 100 + i, static_cast<std::int64_t>(rng() % 50), {}});
      locals.push_back(dist::TopKList::from(e, k));
    }
    // fold left to right
    std::vector<dist::TopKEntry> all;
    for (const auto& l : locals) all.insert(all.end(), l.entries.begin(), l.entries.end());
    auto want = dist::TopKList::from(all, k);
    dist::TopKList got;
    run_cluster(P, [&](ClusterCtx& ctx) {
      auto r = dist::global_topk(ctx, locals[static_cast<std::size_t>(ctx.rank())], k);
      if (ctx.rank() == 0) got = r;
    });
    ASSERT_EQ(got.entries.size(), want.entries.size());
    for (std::size_t i = 0; i < got.entries.size(); ++i) {
      EXPECT_EQ(got.entries[i].key, want.entries[i].key);
      EXPECT_EQ(got.entries[i].value, want.entries[i].value);
    }
  }
}

TEST(Contract, MismatchedCollectivesRaiseProtocolError) {
  EXPECT_THROW(run_cluster(3,
                           [](ClusterCtx& ctx) {
                             if (ctx.rank() == 0)
                               ctx.barrier();
                             else
                               ctx.allgather({});
                           }),
               ProtocolError);
  EXPECT_THROW(run_cluster(2, [](ClusterCtx& ctx) { ctx.broadcast({}, ctx.rank()); }), ProtocolError);
}

TEST(Contract, BadArgumentsRejected) {
  EXPECT_THROW(run_cluster(2, [](ClusterCtx& ctx) { ctx.gather({}, 5); }), InvalidArgument);
  EXPECT_THROW(run_cluster(2, [](ClusterCtx& ctx) { ctx.all_to_all_1factor(std::vector<Bytes>(3)); }), InvalidArgument);
}

TEST(Contract, NodeFailureUnblocksPeers) {
  EXPECT_THROW(run_cluster(4,
                           [](ClusterCtx& ctx) {
                             if (ctx.rank() == 2) throw InvalidArgument("boom");
                             ctx.barrier();
                           }),
               InvalidArgument);
}

TEST(Stats, PhasesAndRounds) {
  auto stats = run_cluster(5, [](ClusterCtx& ctx) {
    auto g = ctx.phase("x/exchange");
    ctx.all_to_all_1factor(std::vector<Bytes>(5, Bytes(10, 0)));
  });
  for (const auto& s : stats) {
    ASSERT_EQ(s.per_collective.size(), 1u);
    EXPECT_EQ(s.per_collective[0].phase, "x/exchange");
    EXPECT_EQ(s.per_collective[0].rounds, 5);
    EXPECT_EQ(s.sent_in_phase("x/"), 40u);
    EXPECT_EQ(s.contributed_in_phase("x/"), 50u);
  }
}

TEST(Stats, DeflateShrinksReplicatedBitsets) {
  // periodic pattern: raw form, highly compressible
  auto make = [] {
    codec::Bitset b(40000);
    for (std::size_t i = 0; i < b.size(); i += 3) b.set(i);
    return b;
  };
  ClusterOptions opt;
  opt.compressor = codec::make_compressor("deflate");
  codec::Bitset want;
  want.append(make());
  want.append(make());
  auto body = [&](ClusterCtx& ctx) { EXPECT_EQ(dist::remote_filter_replicate(ctx, make()), want); };
  auto plain = run_cluster(2, body);
  auto packed = run_cluster(2, body, opt);
  EXPECT_LT(packed[0].bytes_sent * 10, plain[0].bytes_sent);
}
