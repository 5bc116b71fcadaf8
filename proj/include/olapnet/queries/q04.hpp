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

// Q4 order priority checking: orders and lineitem are co-partitioned, so the
// EXISTS test is local; counts per priority are reduced to the root.

#pragma once

#include "olapnet/queries/common.hpp"

namespace olapnet::queries {

inline const std::vector<std::string>& q4_columns() {
  static const std::vector<std::string> c = {"o_orderpriority", "order_count"};
  return c;
}

inline std::pair<std::int64_t, std::int64_t> q4_window(const QueryParams& p) {
  p.check_keys(4, {"DATE"});
  auto from = p.day("DATE", "1993-07-01");
  return {from, date::add_months(from, 3)};
}

inline QueryResult q4_rows(const std::vector<std::int64_t>& counts, const tpch::Dict& prio) {
  QueryResult res{q4_columns(), {}};
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i] > 0) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return (*prio)[a] < (*prio)[b]; });
  for (auto i : order) res.rows.push_back({(*prio)[i], counts[i]});
  return res;
}

inline QueryResult run_q4(ClusterCtx& ctx, const Database& db, const QueryParams& p, const std::string& variant) {
  check_variant(4, variant);
  auto [from, to] = q4_window(p);
  const auto& od = db.orders.col("o_orderdate").values;
  const auto& prio = db.orders.col("o_orderpriority");
  const auto& commit = db.lineitem.col("l_commitdate").values;
  const auto& receipt = db.lineitem.col("l_receiptdate").values;
  std::vector<std::int64_t> counts(prio.dictionary->size(), 0);
  // late-line flag per local order from a full pass over the lineitem columns
  std::vector<bool> late(od.size(), false);
  for (std::size_t o = 0; o < od.size(); ++o)
    for (auto l = db.order_lines[o]; l < db.order_lines[o + 1]; ++l)
      if (commit[static_cast<std::size_t>(l)] < receipt[static_cast<std::size_t>(l)]) late[o] = true;
  for (std::size_t o = 0; o < od.size(); ++o)
    if (od[o] >= from && od[o] < to && late[o]) ++counts[static_cast<std::size_t>(prio[o])];
  const std::uint64_t scanned = od.size() + commit.size();
  ctx.add_scanned(scanned);
  auto total = dist::reduce_sum(ctx, counts, 0);
  if (ctx.rank() != 0) return {q4_columns(), {}};
  return q4_rows(total, prio.dictionary);
}

}  // namespace olapnet::queries
