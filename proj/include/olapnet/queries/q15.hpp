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

// Q15 top supplier. Revenue per supplier is a sum of partial sums spread over
// all nodes. The suppliers with maximum revenue are found with a top-k over
// the sums, doubling k while the k-th value still equals the maximum.
//   naive:          full 64-bit partial sums, all-to-all posted at once
//   naive_1factor:  same payload, 1-factor all-to-all
//   approx:         8-bit approximations, pruning, exact fetch of survivors

#pragma once

#include "olapnet/queries/common.hpp"

namespace olapnet::queries {

inline const std::vector<std::string>& q15_columns() {
  static const std::vector<std::string> c = {"s_suppkey", "s_name", "s_address", "s_phone", "total_revenue"};
  return c;
}

inline std::pair<std::int64_t, std::int64_t> q15_window(const QueryParams& p) {
  p.check_keys(15, {"DATE", "M_BITS"});
  auto from = p.day("DATE", "1996-01-01");
  return {from, date::add_months(from, 3)};
}

inline dist::Aggregation q15_partial_sums(ClusterCtx& ctx, const Database& db, std::int64_t from, std::int64_t to) {
  dist::Aggregation agg{std::vector<std::uint64_t>(static_cast<std::size_t>(db.layout(TableId::Supplier).total_rows()), 0),
                        db.layout(TableId::Supplier)};
  const auto& ship = db.lineitem.col("l_shipdate").values;
  const auto& ep = db.lineitem.col("l_extendedprice").values;
  const auto& disc = db.lineitem.col("l_discount").values;
  const auto& li_supp = db.lineitem_supplier.child_to_parent;
  for (std::size_t i = 0; i < ship.size(); ++i)
    if (ship[i] >= from && ship[i] < to)
      agg.partial[static_cast<std::size_t>(li_supp[i])] += static_cast<std::uint64_t>(disc_price(ep[i], disc[i]));
  ctx.add_scanned(ship.size());
  return agg;
}

inline QueryResult run_q15(ClusterCtx& ctx, const Database& db, const QueryParams& params, const std::string& variant) {
  check_variant(15, variant);
  auto [from, to] = q15_window(params);
  const int m_bits = static_cast<int>(params.integer("M_BITS", 8));
  const auto agg = q15_partial_sums(ctx, db, from, to);
  const auto suppliers = static_cast<std::size_t>(agg.owners.total_rows());

  std::vector<dist::TopKEntry> winners;
  for (std::size_t k = 1;; k *= 2) {
    auto r = variant == "approx" ? dist::approx_topk_sum(ctx, agg, k, m_bits)
                                 : dist::naive_topk_sum(ctx, agg, k, variant == "naive_1factor");
    // root decides whether every maximum is inside the list
    std::int64_t more = 0;
    if (ctx.rank() == 0) {
      const auto& e = r.top.entries;
      more = e.size() == k && k < suppliers && e.front().value > 0 && e.back().value == e.front().value;
      if (!more)
        for (const auto& x : e)
          if (x.value > 0 && x.value == e.front().value) winners.push_back(x);
    }
    auto flag = ctx.broadcast(dist::encode_i64s(std::span<const std::int64_t>(&more, 1)), 0);
    if (dist::decode_i64s(flag)[0] == 0) break;
  }
  std::sort(winners.begin(), winners.end(), [](const auto& a, const auto& b) { return a.key < b.key; });

  std::vector<std::int64_t> rows;
  for (const auto& w : winners) rows.push_back(w.key);
  const auto s_first = db.supplier.partition().first_global_row;
  const auto& skey = db.supplier.col("s_suppkey").values;
  const auto& name = db.supplier.col("s_name");
  const auto& addr = db.supplier.col("s_address");
  const auto& phone = db.supplier.col("s_phone");
  auto attrs = dist::late_materialize(ctx, rows, agg.owners, [&](std::int64_t row) {
    auto i = static_cast<std::size_t>(row - s_first);
    return std::vector<dist::AttrValue>{skey[i], std::string(name.str(i)), std::string(addr.str(i)),
                                        std::string(phone.str(i))};
  });
  QueryResult res{q15_columns(), {}};
  if (ctx.rank() != 0) return res;
  for (std::size_t i = 0; i < winners.size(); ++i)
    res.rows.push_back({std::get<std::int64_t>(attrs[i][0]), std::get<std::string>(attrs[i][1]),
                        std::get<std::string>(attrs[i][2]), std::get<std::string>(attrs[i][3]),
                        Money{winners[i].value, 4}});
  return res;
}

}  // namespace olapnet::queries
