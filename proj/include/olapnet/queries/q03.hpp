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

// Q3 shipping priority. The customer segment is a remote attribute of orders.
//   bitset:    segment bitset over all customers, replicated by allgather
//   lazy:      candidates ranked by revenue, segment requested chunk by chunk
//   repl_attr: segment column replicated at load time

#pragma once

#include "olapnet/queries/common.hpp"

namespace olapnet::queries {

inline const std::vector<std::string>& q3_columns() {
  static const std::vector<std::string> c = {"l_orderkey", "revenue", "o_orderdate", "o_shippriority"};
  return c;
}

struct Q3Params {
  std::string segment;
  std::int64_t day;
};

inline Q3Params q3_params(const QueryParams& p) {
  p.check_keys(3, {"SEGMENT", "DATE"});
  return {p.str("SEGMENT", "BUILDING"), p.day("DATE", "1995-03-15")};
}

struct Q3Row {
  std::int64_t orderkey, revenue, orderdate, shippriority, cust_row;

  void put(ByteWriter& w) const {
    for (auto v : {orderkey, revenue, orderdate, shippriority, cust_row}) w.put_svarint(v);
  }
  static Q3Row get(ByteReader& r) {
    Q3Row x{};
    for (auto* v : {&x.orderkey, &x.revenue, &x.orderdate, &x.shippriority, &x.cust_row}) *v = r.get_svarint();
    return x;
  }
};

inline bool q3_before(const Q3Row& a, const Q3Row& b) {
  if (a.revenue != b.revenue) return a.revenue > b.revenue;
  if (a.orderdate != b.orderdate) return a.orderdate < b.orderdate;
  return a.orderkey < b.orderkey;
}

/// Orders before the date with at least one line shipped after it, with their revenue.
inline std::vector<Q3Row> q3_candidates(ClusterCtx& ctx, const Database& db, std::int64_t day,
                                        const std::function<bool(std::int64_t cust_row)>& keep = {}) {
  const auto& ok = db.orders.col("o_orderkey").values;
  const auto& od = db.orders.col("o_orderdate").values;
  const auto& sp = db.orders.col("o_shippriority").values;
  const auto& ship = db.lineitem.col("l_shipdate").values;
  const auto& ep = db.lineitem.col("l_extendedprice").values;
  const auto& disc = db.lineitem.col("l_discount").values;
  std::vector<Q3Row> out;
  std::uint64_t scanned = ok.size();
  for (std::size_t o = 0; o < ok.size(); ++o) {
    if (od[o] >= day) continue;
    auto cust = db.orders_customer.child_to_parent[o];
    if (keep && !keep(cust)) continue;
    std::int64_t rev = 0;
    bool any = false;
    for (auto l = db.order_lines[o]; l < db.order_lines[o + 1]; ++l) {
      auto i = static_cast<std::size_t>(l);
      ++scanned;
      if (ship[i] <= day) continue;
      any = true;
      rev += disc_price(ep[i], disc[i]);
    }
    if (any) out.push_back({ok[o], rev, od[o], sp[o], cust});
  }
  ctx.add_scanned(scanned);
  return out;
}

inline QueryResult run_q3(ClusterCtx& ctx, const Database& db, const QueryParams& params, const std::string& variant) {
  check_variant(3, variant);
  const auto q = q3_params(params);
  const auto& seg = db.customer.col("c_mktsegment");
  const auto seg_code = dict_code(seg.dictionary, q.segment);
  constexpr std::size_t k = 10;
  std::vector<Q3Row> local;

  if (variant == "bitset") {
    auto global = dist::remote_filter_replicate(ctx, db.customer, [&](std::size_t i) { return seg[i] == seg_code; });
    local = q3_candidates(ctx, db, q.day, [&](std::int64_t c) { return global.test(static_cast<std::size_t>(c)); });
  } else if (variant == "repl_attr") {
    const auto& segs = replicated(db, TableId::Customer, "c_mktsegment");
    local = q3_candidates(ctx, db, q.day, [&](std::int64_t c) { return segs[static_cast<std::size_t>(c)] == seg_code; });
  } else {
    auto cands = q3_candidates(ctx, db, q.day);
    std::sort(cands.begin(), cands.end(), q3_before);
    const auto c_first = db.customer.partition().first_global_row;
    auto lazy = dist::lazy_topk_filter<Q3Row>(
        ctx, cands, [](const Q3Row& r) { return r.cust_row; }, [](const Q3Row& r) { return r.revenue; },
        db.layout(TableId::Customer),
        [&](std::int64_t row) { return seg[static_cast<std::size_t>(row - c_first)] == seg_code; },
        dist::LazyOptions{k, 0, 0});
    ctx.add_counter("q3/lazy_keys_requested", lazy.keys_requested);
    local = std::move(lazy.survivors);
  }

  auto top = dist::global_topk_rows(ctx, std::move(local), k, q3_before, "q3_top");
  QueryResult res{q3_columns(), {}};
  if (ctx.rank() != 0) return res;
  for (const auto& r : top) res.rows.push_back({r.orderkey, Money{r.revenue, 4}, DateValue{r.orderdate}, r.shippriority});
  return res;
}

}  // namespace olapnet::queries
