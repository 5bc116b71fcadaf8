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

// Q11 important stock identification. The supplier nation bitset is
// replicated, part values are summed locally, and the global total for the
// HAVING threshold comes from an allreduce.

#pragma once

#include "olapnet/queries/common.hpp"

namespace olapnet::queries {

inline const std::vector<std::string>& q11_columns() {
  static const std::vector<std::string> c = {"ps_partkey", "value"};
  return c;
}

struct Q11Row {
  std::int64_t partkey, value;
  void put(ByteWriter& w) const {
    w.put_svarint(partkey);
    w.put_svarint(value);
  }
  static Q11Row get(ByteReader& r) {
    Q11Row x{};
    x.partkey = r.get_svarint();
    x.value = r.get_svarint();
    return x;
  }
};

inline bool q11_before(const Q11Row& a, const Q11Row& b) {
  return a.value != b.value ? a.value > b.value : a.partkey < b.partkey;
}

/// value > total * num / den, exactly.
inline bool q11_qualifies(std::int64_t value, std::int64_t total, const Fraction& f) {
  return static_cast<i128>(value) * f.den > static_cast<i128>(total) * f.num;
}

inline QueryResult run_q11(ClusterCtx& ctx, const Database& db, const QueryParams& params, const std::string& variant) {
  check_variant(11, variant);
  params.check_keys(11, {"NATION", "FRACTION_DEN"});
  const auto nk = nation_key(db, params.str("NATION", "GERMANY"));
  const auto frac = q11_fraction(params, db.sf);
  const auto& s_nation = db.supplier.col("s_nationkey").values;
  auto global = dist::remote_filter_replicate(ctx, db.supplier, [&](std::size_t i) { return s_nation[i] == nk; });

  const auto& pkey = db.part.col("p_partkey").values;
  const auto& cost = db.partsupp.col("ps_supplycost").values;
  const auto& qty = db.partsupp.col("ps_availqty").values;
  const auto& ps_supp = db.partsupp_supplier.child_to_parent;
  std::vector<Q11Row> rows;
  std::int64_t total = 0;
  for (std::size_t p = 0; p < pkey.size(); ++p) {
    std::int64_t v = 0;
    bool any = false;
    for (auto s = db.part_supplies[p]; s < db.part_supplies[p + 1]; ++s) {
      auto i = static_cast<std::size_t>(s);
      if (!global.test(static_cast<std::size_t>(ps_supp[i]))) continue;
      any = true;
      v += cost[i] * qty[i];
    }
    if (any) rows.push_back({pkey[p], v});
    total += v;
  }
  ctx.add_scanned(cost.size());
  std::int64_t t = dist::allreduce_sum(ctx, std::span<const std::int64_t>(&total, 1))[0];
  std::erase_if(rows, [&](const Q11Row& r) { return !q11_qualifies(r.value, t, frac); });

  auto parts = ctx.gather(dist::encode_rows(rows), 0);
  QueryResult res{q11_columns(), {}};
  if (ctx.rank() != 0) return res;
  std::vector<Q11Row> all;
  for (const auto& b : parts) {
    auto v = dist::decode_rows<Q11Row>(b);
    all.insert(all.end(), v.begin(), v.end());
  }
  std::sort(all.begin(), all.end(), q11_before);
  for (const auto& r : all) res.rows.push_back({r.partkey, Money{r.value, 2}});
  return res;
}

}  // namespace olapnet::queries
