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

// Q2 minimum cost supplier.
//
// Parts are filtered locally and their partsupp rows are co-located. The
// supplier region test is requested from the supplier owners; the min-cost
// pairs then travel to the supplier owners, which attach the ranking
// attributes. Address and phone are fetched for the final 100 rows only.

#pragma once

#include "olapnet/queries/common.hpp"

namespace olapnet::queries {

inline const std::vector<std::string>& q2_columns() {
  static const std::vector<std::string> c = {"s_acctbal", "s_name", "n_name", "p_partkey", "p_mfgr", "s_address", "s_phone"};
  return c;
}

struct Q2Params {
  std::int64_t size;
  std::string type_pattern;
  std::string region;
};

inline Q2Params q2_params(const QueryParams& p) {
  p.check_keys(2, {"SIZE", "TYPE", "REGION"});
  return {p.integer("SIZE", 15), "%" + p.str("TYPE", "BRASS"), p.str("REGION", "EUROPE")};
}

struct Q2Row {
  std::int64_t acctbal;
  std::string nation;
  std::string s_name;
  std::int64_t partkey;
  std::string mfgr;
  std::int64_t supp_row;

  void put(ByteWriter& w) const {
    w.put_svarint(acctbal);
    w.put_string(nation);
    w.put_string(s_name);
    w.put_svarint(partkey);
    w.put_string(mfgr);
    w.put_svarint(supp_row);
  }
  static Q2Row get(ByteReader& r) {
    Q2Row x;
    x.acctbal = r.get_svarint();
    x.nation = r.get_string();
    x.s_name = r.get_string();
    x.partkey = r.get_svarint();
    x.mfgr = r.get_string();
    x.supp_row = r.get_svarint();
    return x;
  }
};

inline bool q2_before(const Q2Row& a, const Q2Row& b) {
  if (a.acctbal != b.acctbal) return a.acctbal > b.acctbal;
  if (a.nation != b.nation) return a.nation < b.nation;
  if (a.s_name != b.s_name) return a.s_name < b.s_name;
  return a.partkey < b.partkey;
}

inline QueryResult run_q2(ClusterCtx& ctx, const Database& db, const QueryParams& params, const std::string& variant) {
  check_variant(2, variant);
  const auto q = q2_params(params);
  const auto region_nations = nations_in_region(db, region_key(db, q.region));

  // local part filter and co-located partsupp rows
  const auto& psize = db.part.col("p_size").values;
  const auto& ptype = db.part.col("p_type");
  const auto& pkey = db.part.col("p_partkey").values;
  const auto& pmfgr = db.part.col("p_mfgr");
  const auto type_ok = like_mask(ptype, q.type_pattern);
  const auto& ps_supp = db.partsupp_supplier.child_to_parent;
  const auto& ps_cost = db.partsupp.col("ps_supplycost").values;
  std::vector<std::size_t> parts;
  std::vector<std::int64_t> supp_rows;
  for (std::size_t i = 0; i < psize.size(); ++i) {
    if (psize[i] != q.size || !type_ok[static_cast<std::size_t>(ptype[i])]) continue;
    parts.push_back(i);
    for (auto s = db.part_supplies[i]; s < db.part_supplies[i + 1]; ++s) supp_rows.push_back(ps_supp[static_cast<std::size_t>(s)]);
  }
  ctx.add_scanned(psize.size());

  // supplier region test at the supplier owners
  const auto& supp_layout = db.layout(TableId::Supplier);
  const auto& s_nation = db.supplier.col("s_nationkey").values;
  const auto s_first = db.supplier.partition().first_global_row;
  auto answer = dist::remote_filter_request(ctx, dist::group_by_owner(supp_rows, supp_layout), supp_layout,
                                            [&](std::int64_t row) {
                                              auto n = s_nation[static_cast<std::size_t>(row - s_first)];
                                              return n >= 0 && static_cast<std::size_t>(n) < region_nations.size() &&
                                                     region_nations[static_cast<std::size_t>(n)];
                                            });

  // min-cost pairs, routed to supplier owners: [varint n][(supp row, partkey, mfgr) ...]
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(ctx.size()), 0);
  std::vector<ByteWriter> bodies(static_cast<std::size_t>(ctx.size()));
  for (auto i : parts) {
    std::optional<std::int64_t> best;
    for (auto s = db.part_supplies[i]; s < db.part_supplies[i + 1]; ++s) {
      auto row = ps_supp[static_cast<std::size_t>(s)];
      if (answer.passes(row, supp_layout.owner(row)) && (!best || ps_cost[static_cast<std::size_t>(s)] < *best))
        best = ps_cost[static_cast<std::size_t>(s)];
    }
    if (!best) continue;
    for (auto s = db.part_supplies[i]; s < db.part_supplies[i + 1]; ++s) {
      auto row = ps_supp[static_cast<std::size_t>(s)];
      if (ps_cost[static_cast<std::size_t>(s)] != *best || !answer.passes(row, supp_layout.owner(row))) continue;
      auto o = static_cast<std::size_t>(supp_layout.owner(row));
      ++counts[o];
      bodies[o].put_varint(static_cast<std::uint64_t>(row));
      bodies[o].put_svarint(pkey[i]);
      bodies[o].put_string(pmfgr.str(i));
    }
  }
  std::vector<Bytes> out;
  for (std::size_t o = 0; o < bodies.size(); ++o) {
    ByteWriter w;
    w.put_varint(counts[o]);
    w.put_bytes(bodies[o].buffer());
    out.push_back(w.take());
  }
  auto in = ctx.all_to_all_1factor(std::move(out));

  const auto& s_acct = db.supplier.col("s_acctbal").values;
  const auto& s_name = db.supplier.col("s_name");
  const auto& mine = supp_layout.range(ctx.rank());
  std::vector<Q2Row> rows;
  for (const auto& b : in) {
    ByteReader r(b);
    auto n = r.get_varint();
    for (std::uint64_t j = 0; j < n; ++j) {
      auto row = static_cast<std::int64_t>(r.get_varint());
      if (row < mine.first || row >= mine.end()) throw ProtocolError("q2: supplier row routed to the wrong node");
      auto partkey = r.get_svarint();
      auto mfgr = r.get_string();
      auto local = static_cast<std::size_t>(row - mine.first);
      rows.push_back({s_acct[local], nation_name(db, s_nation[local]), std::string(s_name.str(local)), partkey,
                      std::move(mfgr), row});
    }
  }
  auto top = dist::global_topk_rows(ctx, std::move(rows), 100, q2_before, "q2_top");

  std::vector<std::int64_t> keys;
  for (const auto& r : top) keys.push_back(r.supp_row);
  const auto& addr = db.supplier.col("s_address");
  const auto& phone = db.supplier.col("s_phone");
  auto attrs = dist::late_materialize(ctx, keys, supp_layout, [&](std::int64_t row) {
    auto local = static_cast<std::size_t>(row - s_first);
    return std::vector<dist::AttrValue>{std::string(addr.str(local)), std::string(phone.str(local))};
  });
  QueryResult res{q2_columns(), {}};
  if (ctx.rank() != 0) return res;
  for (std::size_t i = 0; i < top.size(); ++i) {
    const auto& r = top[i];
    res.rows.push_back({Money{r.acctbal, 2}, r.s_name, r.nation, r.partkey, r.mfgr,
                        std::get<std::string>(attrs[i][0]), std::get<std::string>(attrs[i][1])});
  }
  return res;
}

}  // namespace olapnet::queries
