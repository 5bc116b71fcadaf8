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

// Q21 suppliers who kept orders waiting. The EXISTS / NOT EXISTS tests are
// local per order; the supplier nation is remote.
//   bitset:    nation bitset over all suppliers replicated before aggregating
//   late:      aggregate first, then request the nation test for suppliers
//              that hold up at least one order
//   repl_attr: nation column replicated at load time

#pragma once

#include "olapnet/queries/common.hpp"

namespace olapnet::queries {

inline const std::vector<std::string>& q21_columns() {
  static const std::vector<std::string> c = {"s_name", "numwait"};
  return c;
}

struct Q21Row {
  std::int64_t numwait;
  std::string s_name;

  void put(ByteWriter& w) const {
    w.put_svarint(numwait);
    w.put_string(s_name);
  }
  static Q21Row get(ByteReader& r) {
    Q21Row x;
    x.numwait = r.get_svarint();
    x.s_name = r.get_string();
    return x;
  }
};

inline bool q21_before(const Q21Row& a, const Q21Row& b) {
  return a.numwait != b.numwait ? a.numwait > b.numwait : a.s_name < b.s_name;
}

/// Waiting-line counts per supplier row over this node's 'F' orders.
inline std::map<std::int64_t, std::int64_t> q21_counts(ClusterCtx& ctx, const Database& db,
                                                       const std::function<bool(std::int64_t)>& keep = {}) {
  const auto& status = db.orders.col("o_orderstatus");
  const auto f_code = dict_code(status.dictionary, "F");
  const auto& commit = db.lineitem.col("l_commitdate").values;
  const auto& receipt = db.lineitem.col("l_receiptdate").values;
  const auto& li_supp = db.lineitem_supplier.child_to_parent;
  std::map<std::int64_t, std::int64_t> counts;
  std::uint64_t scanned = status.size();
  for (std::size_t o = 0; o < status.size(); ++o) {
    if (status[o] != f_code) continue;
    auto b = static_cast<std::size_t>(db.order_lines[o]), e = static_cast<std::size_t>(db.order_lines[o + 1]);
    scanned += e - b;
    std::int64_t late_supp = -1;
    bool several_late = false, several = false;
    std::int64_t late_lines = 0;
    for (auto l = b; l < e; ++l) {
      several = several || li_supp[l] != li_supp[b];
      if (receipt[l] <= commit[l]) continue;
      if (late_supp >= 0 && li_supp[l] != late_supp) several_late = true;
      late_supp = li_supp[l];
      ++late_lines;
    }
    if (late_supp < 0 || several_late || !several) continue;
    if (keep && !keep(late_supp)) continue;
    counts[late_supp] += late_lines;
  }
  ctx.add_scanned(scanned);
  return counts;
}

inline QueryResult run_q21(ClusterCtx& ctx, const Database& db, const QueryParams& params, const std::string& variant) {
  check_variant(21, variant);
  params.check_keys(21, {"NATION"});
  const auto nk = nation_key(db, params.str("NATION", "SAUDI ARABIA"));
  const auto& supp_layout = db.layout(TableId::Supplier);
  const auto& s_nation = db.supplier.col("s_nationkey").values;
  const auto s_first = db.supplier.partition().first_global_row;
  std::map<std::int64_t, std::int64_t> counts;

  if (variant == "bitset") {
    auto global = dist::remote_filter_replicate(ctx, db.supplier, [&](std::size_t i) { return s_nation[i] == nk; });
    counts = q21_counts(ctx, db, [&](std::int64_t s) { return global.test(static_cast<std::size_t>(s)); });
  } else if (variant == "repl_attr") {
    const auto& nations = replicated(db, TableId::Supplier, "s_nationkey");
    counts = q21_counts(ctx, db, [&](std::int64_t s) { return nations[static_cast<std::size_t>(s)] == nk; });
  } else {
    counts = q21_counts(ctx, db);
    std::vector<std::int64_t> supps;
    for (const auto& [s, c] : counts) supps.push_back(s);
    auto answer = dist::remote_filter_request(ctx, dist::group_by_owner(supps, supp_layout), supp_layout,
                                              [&](std::int64_t row) { return s_nation[static_cast<std::size_t>(row - s_first)] == nk; });
    std::erase_if(counts, [&](const auto& kv) { return !answer.passes(kv.first, supp_layout.owner(kv.first)); });
  }

  auto totals = sum_counts_at_owners(ctx, counts, supp_layout);
  const auto& name = db.supplier.col("s_name");
  std::vector<Q21Row> rows;
  for (std::size_t i = 0; i < totals.size(); ++i)
    if (totals[i] > 0) rows.push_back({totals[i], std::string(name.str(i))});
  auto top = dist::global_topk_rows(ctx, std::move(rows), 100, q21_before, "q21_top");
  QueryResult res{q21_columns(), {}};
  if (ctx.rank() != 0) return res;
  for (const auto& r : top) res.rows.push_back({r.s_name, r.numwait});
  return res;
}

}  // namespace olapnet::queries
