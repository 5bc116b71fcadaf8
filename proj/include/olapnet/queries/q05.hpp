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

// Q5 local supplier volume. Supplier nations are replicated at load; the
// nations of the ordering customers are fetched from their owners.

#pragma once

#include "olapnet/queries/common.hpp"

namespace olapnet::queries {

inline const std::vector<std::string>& q5_columns() {
  static const std::vector<std::string> c = {"n_name", "revenue"};
  return c;
}

struct Q5Params {
  std::string region;
  std::int64_t from, to;
};

inline Q5Params q5_params(const QueryParams& p) {
  p.check_keys(5, {"REGION", "DATE"});
  auto from = p.day("DATE", "1994-01-01");
  return {p.str("REGION", "ASIA"), from, date::add_months(from, 12)};
}

/// Rows from per-nation [revenue, count] sums, ordered by revenue desc, name asc.
inline QueryResult q5_rows(const Database& db, const std::vector<std::int64_t>& acc) {
  QueryResult res{q5_columns(), {}};
  std::vector<std::pair<std::int64_t, std::string>> rows;
  for (std::size_t n = 0; n < acc.size() / 2; ++n)
    if (acc[2 * n + 1] > 0) rows.emplace_back(acc[2 * n], nation_name(db, static_cast<std::int64_t>(n)));
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  for (auto& [rev, name] : rows) res.rows.push_back({name, Money{rev, 4}});
  return res;
}

inline QueryResult run_q5(ClusterCtx& ctx, const Database& db, const QueryParams& params, const std::string& variant) {
  check_variant(5, variant);
  const auto q = q5_params(params);
  const auto in_region = nations_in_region(db, region_key(db, q.region));
  const auto& supp_nation = replicated(db, TableId::Supplier, "s_nationkey");
  const auto& od = db.orders.col("o_orderdate").values;
  const auto& ep = db.lineitem.col("l_extendedprice").values;
  const auto& disc = db.lineitem.col("l_discount").values;
  const auto& li_supp = db.lineitem_supplier.child_to_parent;

  struct Hit {
    std::int64_t cust_row, nation, revenue;
  };
  std::vector<Hit> hits;
  std::uint64_t scanned = od.size();
  for (std::size_t o = 0; o < od.size(); ++o) {
    if (od[o] < q.from || od[o] >= q.to) continue;
    auto cust = db.orders_customer.child_to_parent[o];
    for (auto l = db.order_lines[o]; l < db.order_lines[o + 1]; ++l) {
      auto i = static_cast<std::size_t>(l);
      ++scanned;
      auto n = supp_nation[static_cast<std::size_t>(li_supp[i])];
      if (!in_region[static_cast<std::size_t>(n)]) continue;
      hits.push_back({cust, n, disc_price(ep[i], disc[i])});
    }
  }
  ctx.add_scanned(scanned);

  std::vector<std::int64_t> custs;
  for (const auto& h : hits) custs.push_back(h.cust_row);
  const auto& cust_layout = db.layout(TableId::Customer);
  const auto& c_nation = db.customer.col("c_nationkey").values;
  const auto c_first = db.customer.partition().first_global_row;
  auto nations = dist::remote_attribute_request(ctx, dist::group_by_owner(custs, cust_layout), cust_layout,
                                                [&](std::int64_t row) { return c_nation[static_cast<std::size_t>(row - c_first)]; });

  std::vector<std::int64_t> acc(static_cast<std::size_t>(db.nation.row_count()) * 2, 0);
  for (const auto& h : hits) {
    if (nations.value(h.cust_row, cust_layout.owner(h.cust_row)) != h.nation) continue;
    acc[static_cast<std::size_t>(h.nation) * 2] += h.revenue;
    acc[static_cast<std::size_t>(h.nation) * 2 + 1] += 1;
  }
  auto total = dist::reduce_sum(ctx, acc, 0);
  if (ctx.rank() != 0) return {q5_columns(), {}};
  return q5_rows(db, total);
}

}  // namespace olapnet::queries
