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

// Q18 large volume customer: local per-order quantity sums, local and then
// global top-100, customer names fetched afterwards.

#pragma once

#include "olapnet/queries/common.hpp"

namespace olapnet::queries {

inline const std::vector<std::string>& q18_columns() {
  static const std::vector<std::string> c = {"c_name",      "c_custkey",    "o_orderkey",
                                             "o_orderdate", "o_totalprice", "sum_qty"};
  return c;
}

struct Q18Row {
  std::int64_t orderkey, custkey, cust_row, orderdate, totalprice, qty;

  void put(ByteWriter& w) const {
    for (auto v : {orderkey, custkey, cust_row, orderdate, totalprice, qty}) w.put_svarint(v);
  }
  static Q18Row get(ByteReader& r) {
    Q18Row x{};
    for (auto* v : {&x.orderkey, &x.custkey, &x.cust_row, &x.orderdate, &x.totalprice, &x.qty}) *v = r.get_svarint();
    return x;
  }
};

inline bool q18_before(const Q18Row& a, const Q18Row& b) {
  if (a.totalprice != b.totalprice) return a.totalprice > b.totalprice;
  if (a.orderdate != b.orderdate) return a.orderdate < b.orderdate;
  return a.orderkey < b.orderkey;
}

inline std::int64_t q18_threshold(const QueryParams& p) {
  p.check_keys(18, {"QUANTITY"});
  return p.integer("QUANTITY", 300);
}

inline QueryResult run_q18(ClusterCtx& ctx, const Database& db, const QueryParams& p, const std::string& variant) {
  check_variant(18, variant);
  const auto threshold = q18_threshold(p);
  const auto& ok = db.orders.col("o_orderkey").values;
  const auto& ck = db.orders.col("o_custkey").values;
  const auto& od = db.orders.col("o_orderdate").values;
  const auto& tp = db.orders.col("o_totalprice").values;
  const auto& qty = db.lineitem.col("l_quantity").values;
  std::vector<Q18Row> rows;
  for (std::size_t o = 0; o < ok.size(); ++o) {
    std::int64_t q = 0;
    for (auto l = db.order_lines[o]; l < db.order_lines[o + 1]; ++l) q += qty[static_cast<std::size_t>(l)];
    if (q > threshold) rows.push_back({ok[o], ck[o], db.orders_customer.child_to_parent[o], od[o], tp[o], q});
  }
  ctx.add_scanned(ok.size() + qty.size());
  auto top = dist::global_topk_rows(ctx, std::move(rows), 100, q18_before, "q18_top");

  std::vector<std::int64_t> cust_rows;
  for (const auto& r : top) cust_rows.push_back(r.cust_row);
  const auto& cname = db.customer.col("c_name");
  const auto& cfirst = db.customer.partition().first_global_row;
  auto names = dist::late_materialize(ctx, cust_rows, db.layout(TableId::Customer), [&](std::int64_t row) {
    return std::vector<dist::AttrValue>{std::string(cname.str(static_cast<std::size_t>(row - cfirst)))};
  });
  QueryResult res{q18_columns(), {}};
  if (ctx.rank() != 0) return res;
  for (std::size_t i = 0; i < top.size(); ++i) {
    const auto& r = top[i];
    res.rows.push_back({std::get<std::string>(names[i][0]), r.custkey, r.orderkey, DateValue{r.orderdate},
                        Money{r.totalprice, 2}, r.qty});
  }
  return res;
}

}  // namespace olapnet::queries
