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

// Q1 pricing summary: purely local aggregation into at most 6 groups, one reduce.

#pragma once

#include "olapnet/queries/common.hpp"

namespace olapnet::queries {

inline const std::vector<std::string>& q1_columns() {
  static const std::vector<std::string> c = {"l_returnflag", "l_linestatus", "sum_qty",   "sum_base_price", "sum_disc_price",
                                             "sum_charge",   "avg_qty",      "avg_price", "avg_disc",       "count_order"};
  return c;
}

inline std::int64_t q1_cutoff(const QueryParams& p) {
  p.check_keys(1, {"DELTA"});
  return date::from_ymd(1998, 12, 1) - p.integer("DELTA", 90);
}

/// Builds result rows from per-group accumulators [qty, base, disc_price, charge, disc, count].
inline QueryResult q1_rows(const std::vector<std::int64_t>& acc, const tpch::Dict& flags, const tpch::Dict& statuses) {
  QueryResult res{q1_columns(), {}};
  std::vector<std::size_t> order;
  for (std::size_t g = 0; g < acc.size() / 6; ++g)
    if (acc[g * 6 + 5] > 0) order.push_back(g);
  const std::size_t ns = statuses->size();
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    auto ka = std::pair((*flags)[a / ns], (*statuses)[a % ns]);
    auto kb = std::pair((*flags)[b / ns], (*statuses)[b % ns]);
    return ka < kb;
  });
  for (auto g : order) {
    const auto* a = &acc[g * 6];
    res.rows.push_back({(*flags)[g / ns], (*statuses)[g % ns], a[0], Money{a[1], 2}, Money{a[2], 4}, Money{a[3], 6},
                        Ratio{a[0], a[5]}, Ratio{a[1], a[5] * 100}, Ratio{a[4], a[5] * 100}, a[5]});
  }
  return res;
}

inline QueryResult run_q1(ClusterCtx& ctx, const Database& db, const QueryParams& p, const std::string& variant) {
  check_variant(1, variant);
  const auto cutoff = q1_cutoff(p);
  const auto& li = db.lineitem;
  const auto& rf = li.col("l_returnflag");
  const auto& ls = li.col("l_linestatus");
  const auto& qty = li.col("l_quantity").values;
  const auto& ep = li.col("l_extendedprice").values;
  const auto& disc = li.col("l_discount").values;
  const auto& tax = li.col("l_tax").values;
  const auto& ship = li.col("l_shipdate").values;
  const std::size_t ns = ls.dictionary->size();
  std::vector<std::int64_t> acc(rf.dictionary->size() * ns * 6, 0);
  for (std::size_t i = 0; i < ship.size(); ++i) {
    if (ship[i] > cutoff) continue;
    auto* a = &acc[(static_cast<std::size_t>(rf[i]) * ns + static_cast<std::size_t>(ls[i])) * 6];
    a[0] += qty[i];
    a[1] += ep[i];
    a[2] += disc_price(ep[i], disc[i]);
    a[3] += disc_price(ep[i], disc[i]) * (100 + tax[i]);
    a[4] += disc[i];
    a[5] += 1;
  }
  ctx.add_scanned(ship.size());
  auto total = dist::reduce_sum(ctx, acc, 0);
  if (ctx.rank() != 0) return {q1_columns(), {}};
  return q1_rows(total, rf.dictionary, ls.dictionary);
}

}  // namespace olapnet::queries
