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

// Q14 promotion effect. The part type test is requested from the part owners;
// the promotion and total revenue are reduced to the root.

#pragma once

#include "olapnet/queries/common.hpp"

namespace olapnet::queries {

inline const std::vector<std::string>& q14_columns() {
  static const std::vector<std::string> c = {"promo_revenue"};
  return c;
}

inline std::pair<std::int64_t, std::int64_t> q14_window(const QueryParams& p) {
  p.check_keys(14, {"DATE"});
  auto from = p.day("DATE", "1995-09-01");
  return {from, date::add_months(from, 1)};
}

/// Percentage 100 * promo / total; 0 when nothing shipped in the window.
inline QueryResult q14_rows(std::int64_t promo, std::int64_t total) {
  return {q14_columns(), {{Ratio{total == 0 ? 0 : 100 * promo, total == 0 ? 1 : total}}}};
}

inline QueryResult run_q14(ClusterCtx& ctx, const Database& db, const QueryParams& params, const std::string& variant) {
  check_variant(14, variant);
  auto [from, to] = q14_window(params);
  const auto& ship = db.lineitem.col("l_shipdate").values;
  const auto& ep = db.lineitem.col("l_extendedprice").values;
  const auto& disc = db.lineitem.col("l_discount").values;
  const auto& li_part = db.lineitem_part.child_to_parent;
  std::vector<std::size_t> lines;
  std::vector<std::int64_t> parts;
  for (std::size_t i = 0; i < ship.size(); ++i)
    if (ship[i] >= from && ship[i] < to) {
      lines.push_back(i);
      parts.push_back(li_part[i]);
    }
  ctx.add_scanned(ship.size());

  const auto& part_layout = db.layout(TableId::Part);
  const auto& ptype = db.part.col("p_type");
  const auto promo = like_mask(ptype, "PROMO%");
  const auto p_first = db.part.partition().first_global_row;
  auto answer = dist::remote_filter_request(ctx, dist::group_by_owner(parts, part_layout), part_layout, [&](std::int64_t row) {
    return promo[static_cast<std::size_t>(ptype[static_cast<std::size_t>(row - p_first)])];
  });

  std::vector<std::int64_t> sums(2, 0);
  for (auto i : lines) {
    auto rev = disc_price(ep[i], disc[i]);
    sums[1] += rev;
    if (answer.passes(li_part[i], part_layout.owner(li_part[i]))) sums[0] += rev;
  }
  auto total = dist::reduce_sum(ctx, sums, 0);
  if (ctx.rank() != 0) return {q14_columns(), {}};
  return q14_rows(total[0], total[1]);
}

}  // namespace olapnet::queries
