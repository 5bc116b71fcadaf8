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

/**
 * @file oracle.hpp
 * @brief Single-node reference evaluation of the implemented queries.
 *
 * Works on whole tables, joins through hash maps on key values and never
 * touches join indexes, collectives or the distributed operators.
 */

#pragma once

#include <map>
#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "olapnet/queries/q01.hpp"
#include "olapnet/queries/q02.hpp"
#include "olapnet/queries/q03.hpp"
#include "olapnet/queries/q04.hpp"
#include "olapnet/queries/q05.hpp"
#include "olapnet/queries/q11.hpp"
#include "olapnet/queries/q13.hpp"
#include "olapnet/queries/q14.hpp"
#include "olapnet/queries/q15.hpp"
#include "olapnet/queries/q18.hpp"
#include "olapnet/queries/q21.hpp"

namespace olapnet::queries::oracle {

namespace detail {

struct Cols {
  const ColumnTable& t;
  const Column& operator[](std::string_view c) const { return t.col(c); }
  std::size_t rows() const { return static_cast<std::size_t>(t.row_count()); }
};

inline std::string s(const Column& c, std::size_t i) { return std::string(c.str(i)); }

/// key value -> row index
inline std::unordered_map<std::int64_t, std::size_t> index_of(const Column& keys) {
  std::unordered_map<std::int64_t, std::size_t> m;
  for (std::size_t i = 0; i < keys.size(); ++i) m.emplace(keys[i], i);
  return m;
}

inline std::map<std::int64_t, std::string> nation_names(const Database& db) {
  std::map<std::int64_t, std::string> m;
  Cols n{db.nation};
  for (std::size_t i = 0; i < n.rows(); ++i) m[n["n_nationkey"][i]] = s(n["n_name"], i);
  return m;
}

inline std::map<std::int64_t, std::int64_t> nation_region(const Database& db) {
  std::map<std::int64_t, std::int64_t> m;
  Cols n{db.nation};
  for (std::size_t i = 0; i < n.rows(); ++i) m[n["n_nationkey"][i]] = n["n_regionkey"][i];
  return m;
}

inline std::int64_t region_by_name(const Database& db, const std::string& name) {
  Cols r{db.region};
  for (std::size_t i = 0; i < r.rows(); ++i)
    if (s(r["r_name"], i) == name) return r["r_regionkey"][i];
  return -1;
}

/// Orders of each order key, lines grouped by order key.
inline std::map<std::int64_t, std::vector<std::size_t>> lines_by_order(const Database& db) {
  std::map<std::int64_t, std::vector<std::size_t>> m;
  const auto& ok = db.lineitem.col("l_orderkey");
  for (std::size_t i = 0; i < ok.size(); ++i) m[ok[i]].push_back(i);
  return m;
}

}  // namespace detail

using detail::Cols;

inline QueryResult q1(const Database& db, const QueryParams& p) {
  auto cutoff = date::from_ymd(1998, 12, 1) - p.integer("DELTA", 90);
  p.check_keys(1, {"DELTA"});
  Cols l{db.lineitem};
  std::map<std::pair<std::string, std::string>, std::array<std::int64_t, 6>> g;
  for (std::size_t i = 0; i < l.rows(); ++i) {
    if (l["l_shipdate"][i] > cutoff) continue;
    auto& a = g[{detail::s(l["l_returnflag"], i), detail::s(l["l_linestatus"], i)}];
    std::int64_t ep = l["l_extendedprice"][i], d = l["l_discount"][i], t = l["l_tax"][i];
    a[0] += l["l_quantity"][i];
    a[1] += ep;
    a[2] += ep * (100 - d);
    a[3] += ep * (100 - d) * (100 + t);
    a[4] += d;
    a[5] += 1;
  }
  QueryResult res{q1_columns(), {}};
  for (const auto& [k, a] : g)
    res.rows.push_back({k.first, k.second, a[0], Money{a[1], 2}, Money{a[2], 4}, Money{a[3], 6}, Ratio{a[0], a[5]},
                        Ratio{a[1], a[5] * 100}, Ratio{a[4], a[5] * 100}, a[5]});
  return res;
}

inline QueryResult q2(const Database& db, const QueryParams& params) {
  auto q = q2_params(params);
  Cols part{db.part}, ps{db.partsupp}, sup{db.supplier};
  auto nname = detail::nation_names(db);
  auto nreg = detail::nation_region(db);
  auto reg = detail::region_by_name(db, q.region);
  auto supp_idx = detail::index_of(sup["s_suppkey"]);
  std::unordered_map<std::int64_t, std::size_t> part_idx;
  for (std::size_t i = 0; i < part.rows(); ++i)
    if (part["p_size"][i] == q.size && tpch::like(part["p_type"].str(i), q.type_pattern)) part_idx[part["p_partkey"][i]] = i;
  auto in_region = [&](std::size_t srow) { return nreg[sup["s_nationkey"][srow]] == reg; };
  std::map<std::int64_t, std::int64_t> min_cost;
  for (std::size_t i = 0; i < ps.rows(); ++i) {
    auto pk = ps["ps_partkey"][i];
    if (!part_idx.count(pk) || !in_region(supp_idx.at(ps["ps_suppkey"][i]))) continue;
    auto c = ps["ps_supplycost"][i];
    auto it = min_cost.find(pk);
    if (it == min_cost.end() || c < it->second) min_cost[pk] = c;
  }
  using Key = std::tuple<std::int64_t, std::string, std::string, std::int64_t>;  // -acctbal, nation, name, partkey
  std::vector<std::pair<Key, std::vector<Value>>> rows;
  for (std::size_t i = 0; i < ps.rows(); ++i) {
    auto pk = ps["ps_partkey"][i];
    auto it = min_cost.find(pk);
    if (it == min_cost.end() || ps["ps_supplycost"][i] != it->second) continue;
    auto sr = supp_idx.at(ps["ps_suppkey"][i]);
    if (!in_region(sr)) continue;
    auto pr = part_idx.at(pk);
    auto nation = nname[sup["s_nationkey"][sr]];
    auto name = detail::s(sup["s_name"], sr);
    rows.push_back({Key{-sup["s_acctbal"][sr], nation, name, pk},
                    {Money{sup["s_acctbal"][sr], 2}, name, nation, pk, detail::s(part["p_mfgr"], pr),
                     detail::s(sup["s_address"], sr), detail::s(sup["s_phone"], sr)}});
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  QueryResult res{q2_columns(), {}};
  for (std::size_t i = 0; i < rows.size() && i < 100; ++i) res.rows.push_back(rows[i].second);
  return res;
}

inline QueryResult q3(const Database& db, const QueryParams& params) {
  auto q = q3_params(params);
  Cols c{db.customer}, o{db.orders}, l{db.lineitem};
  std::unordered_set<std::int64_t> custs;
  for (std::size_t i = 0; i < c.rows(); ++i)
    if (detail::s(c["c_mktsegment"], i) == q.segment) custs.insert(c["c_custkey"][i]);
  auto order_idx = detail::index_of(o["o_orderkey"]);
  std::map<std::int64_t, std::int64_t> revenue;
  for (std::size_t i = 0; i < l.rows(); ++i) {
    if (l["l_shipdate"][i] <= q.day) continue;
    auto orow = order_idx.at(l["l_orderkey"][i]);
    if (o["o_orderdate"][orow] >= q.day || !custs.count(o["o_custkey"][orow])) continue;
    revenue[l["l_orderkey"][i]] += l["l_extendedprice"][i] * (100 - l["l_discount"][i]);
  }
  using Key = std::tuple<std::int64_t, std::int64_t, std::int64_t>;  // -revenue, date, orderkey
  std::vector<Key> keys;
  for (const auto& [ok, rev] : revenue) keys.emplace_back(-rev, o["o_orderdate"][order_idx.at(ok)], ok);
  std::sort(keys.begin(), keys.end());
  QueryResult res{q3_columns(), {}};
  for (std::size_t i = 0; i < keys.size() && i < 10; ++i) {
    auto [nrev, d, ok] = keys[i];
    res.rows.push_back({ok, Money{-nrev, 4}, DateValue{d}, o["o_shippriority"][order_idx.at(ok)]});
  }
  return res;
}

inline QueryResult q4(const Database& db, const QueryParams& params) {
  auto [from, to] = q4_window(params);
  Cols o{db.orders}, l{db.lineitem};
  std::unordered_set<std::int64_t> late;
  for (std::size_t i = 0; i < l.rows(); ++i)
    if (l["l_commitdate"][i] < l["l_receiptdate"][i]) late.insert(l["l_orderkey"][i]);
  std::map<std::string, std::int64_t> counts;
  for (std::size_t i = 0; i < o.rows(); ++i)
    if (o["o_orderdate"][i] >= from && o["o_orderdate"][i] < to && late.count(o["o_orderkey"][i]))
      ++counts[detail::s(o["o_orderpriority"], i)];
  QueryResult res{q4_columns(), {}};
  for (const auto& [k, n] : counts) res.rows.push_back({k, n});
  return res;
}

inline QueryResult q5(const Database& db, const QueryParams& params) {
  auto q = q5_params(params);
  Cols c{db.customer}, o{db.orders}, l{db.lineitem}, sup{db.supplier};
  auto nname = detail::nation_names(db);
  auto nreg = detail::nation_region(db);
  auto reg = detail::region_by_name(db, q.region);
  auto cust_idx = detail::index_of(c["c_custkey"]);
  auto supp_idx = detail::index_of(sup["s_suppkey"]);
  auto order_idx = detail::index_of(o["o_orderkey"]);
  std::map<std::string, std::int64_t> rev;
  for (std::size_t i = 0; i < l.rows(); ++i) {
    auto orow = order_idx.at(l["l_orderkey"][i]);
    if (o["o_orderdate"][orow] < q.from || o["o_orderdate"][orow] >= q.to) continue;
    auto cn = c["c_nationkey"][cust_idx.at(o["o_custkey"][orow])];
    auto sn = sup["s_nationkey"][supp_idx.at(l["l_suppkey"][i])];
    if (cn != sn || nreg[sn] != reg) continue;
    rev[nname[sn]] += l["l_extendedprice"][i] * (100 - l["l_discount"][i]);
  }
  std::vector<std::pair<std::int64_t, std::string>> rows;
  for (const auto& [n, r] : rev) rows.emplace_back(-r, n);
  std::sort(rows.begin(), rows.end());
  QueryResult res{q5_columns(), {}};
  for (const auto& [nr, n] : rows) res.rows.push_back({n, Money{-nr, 4}});
  return res;
}

inline QueryResult q11(const Database& db, const QueryParams& params) {
  params.check_keys(11, {"NATION", "FRACTION_DEN"});
  auto nation = params.str("NATION", "GERMANY");
  auto frac = q11_fraction(params, db.sf);
  Cols ps{db.partsupp}, sup{db.supplier};
  auto nname = detail::nation_names(db);
  std::unordered_set<std::int64_t> supps;
  for (std::size_t i = 0; i < sup.rows(); ++i)
    if (nname[sup["s_nationkey"][i]] == nation) supps.insert(sup["s_suppkey"][i]);
  std::map<std::int64_t, std::int64_t> value;
  std::int64_t total = 0;
  for (std::size_t i = 0; i < ps.rows(); ++i) {
    if (!supps.count(ps["ps_suppkey"][i])) continue;
    auto v = ps["ps_supplycost"][i] * ps["ps_availqty"][i];
    value[ps["ps_partkey"][i]] += v;
    total += v;
  }
  std::vector<std::pair<std::int64_t, std::int64_t>> rows;  // -value, partkey
  for (const auto& [pk, v] : value)
    if (static_cast<i128>(v) * frac.den > static_cast<i128>(total) * frac.num) rows.emplace_back(-v, pk);
  std::sort(rows.begin(), rows.end());
  QueryResult res{q11_columns(), {}};
  for (const auto& [nv, pk] : rows) res.rows.push_back({pk, Money{-nv, 2}});
  return res;
}

inline QueryResult q13(const Database& db, const QueryParams& params) {
  auto pattern = q13_pattern(params);
  Cols c{db.customer}, o{db.orders};
  std::unordered_map<std::int64_t, std::int64_t> per_cust;
  for (std::size_t i = 0; i < c.rows(); ++i) per_cust[c["c_custkey"][i]] = 0;
  for (std::size_t i = 0; i < o.rows(); ++i)
    if (!tpch::like(o["o_comment"].str(i), pattern)) ++per_cust[o["o_custkey"][i]];
  std::map<std::int64_t, std::int64_t> hist;
  for (const auto& [k, n] : per_cust) ++hist[n];
  std::vector<std::pair<std::int64_t, std::int64_t>> rows;  // -custdist, -c_count
  for (const auto& [cnt, n] : hist) rows.emplace_back(-n, -cnt);
  std::sort(rows.begin(), rows.end());
  QueryResult res{q13_columns(), {}};
  for (const auto& [nn, nc] : rows) res.rows.push_back({-nc, -nn});
  return res;
}

inline QueryResult q14(const Database& db, const QueryParams& params) {
  auto [from, to] = q14_window(params);
  Cols l{db.lineitem}, part{db.part};
  auto part_idx = detail::index_of(part["p_partkey"]);
  std::int64_t promo = 0, total = 0;
  for (std::size_t i = 0; i < l.rows(); ++i) {
    auto d = l["l_shipdate"][i];
    if (d < from || d >= to) continue;
    auto rev = l["l_extendedprice"][i] * (100 - l["l_discount"][i]);
    total += rev;
    if (part["p_type"].str(part_idx.at(l["l_partkey"][i])).starts_with("PROMO")) promo += rev;
  }
  return q14_rows(promo, total);
}

inline QueryResult q15(const Database& db, const QueryParams& params) {
  auto [from, to] = q15_window(params);
  Cols l{db.lineitem}, sup{db.supplier};
  std::map<std::int64_t, std::int64_t> rev;
  for (std::size_t i = 0; i < l.rows(); ++i) {
    auto d = l["l_shipdate"][i];
    if (d >= from && d < to) rev[l["l_suppkey"][i]] += l["l_extendedprice"][i] * (100 - l["l_discount"][i]);
  }
  std::int64_t best = 0;
  for (const auto& [k, v] : rev) best = std::max(best, v);
  auto supp_idx = detail::index_of(sup["s_suppkey"]);
  QueryResult res{q15_columns(), {}};
  for (const auto& [k, v] : rev) {
    if (v != best || best == 0) continue;
    auto i = supp_idx.at(k);
    res.rows.push_back({k, detail::s(sup["s_name"], i), detail::s(sup["s_address"], i), detail::s(sup["s_phone"], i),
                        Money{v, 4}});
  }
  return res;
}

inline QueryResult q18(const Database& db, const QueryParams& params) {
  auto threshold = q18_threshold(params);
  Cols c{db.customer}, o{db.orders}, l{db.lineitem};
  std::unordered_map<std::int64_t, std::int64_t> qty;
  for (std::size_t i = 0; i < l.rows(); ++i) qty[l["l_orderkey"][i]] += l["l_quantity"][i];
  auto cust_idx = detail::index_of(c["c_custkey"]);
  using Key = std::tuple<std::int64_t, std::int64_t, std::int64_t>;  // -totalprice, date, orderkey
  std::vector<std::pair<Key, std::size_t>> rows;
  for (std::size_t i = 0; i < o.rows(); ++i) {
    auto it = qty.find(o["o_orderkey"][i]);
    if (it == qty.end() || it->second <= threshold) continue;
    rows.push_back({Key{-o["o_totalprice"][i], o["o_orderdate"][i], o["o_orderkey"][i]}, i});
  }
  std::sort(rows.begin(), rows.end());
  QueryResult res{q18_columns(), {}};
  for (std::size_t j = 0; j < rows.size() && j < 100; ++j) {
    auto i = rows[j].second;
    auto ck = o["o_custkey"][i];
    res.rows.push_back({detail::s(c["c_name"], cust_idx.at(ck)), ck, o["o_orderkey"][i], DateValue{o["o_orderdate"][i]},
                        Money{o["o_totalprice"][i], 2}, qty.at(o["o_orderkey"][i])});
  }
  return res;
}

inline QueryResult q21(const Database& db, const QueryParams& params) {
  params.check_keys(21, {"NATION"});
  auto nation = params.str("NATION", "SAUDI ARABIA");
  Cols o{db.orders}, l{db.lineitem}, sup{db.supplier};
  auto nname = detail::nation_names(db);
  auto supp_idx = detail::index_of(sup["s_suppkey"]);
  auto order_idx = detail::index_of(o["o_orderkey"]);
  auto by_order = detail::lines_by_order(db);
  std::map<std::string, std::int64_t> numwait;
  for (std::size_t i = 0; i < l.rows(); ++i) {
    auto sk = l["l_suppkey"][i];
    auto srow = supp_idx.at(sk);
    if (nname[sup["s_nationkey"][srow]] != nation) continue;
    if (l["l_receiptdate"][i] <= l["l_commitdate"][i]) continue;
    auto ok = l["l_orderkey"][i];
    if (detail::s(o["o_orderstatus"], order_idx.at(ok)) != "F") continue;
    bool exists_other = false, other_late = false;
    for (auto j : by_order.at(ok)) {
      if (l["l_suppkey"][j] == sk) continue;
      exists_other = true;
      if (l["l_receiptdate"][j] > l["l_commitdate"][j]) other_late = true;
    }
    if (exists_other && !other_late) ++numwait[detail::s(sup["s_name"], srow)];
  }
  std::vector<std::pair<std::int64_t, std::string>> rows;
  for (const auto& [n, c] : numwait) rows.emplace_back(-c, n);
  std::sort(rows.begin(), rows.end());
  QueryResult res{q21_columns(), {}};
  for (std::size_t i = 0; i < rows.size() && i < 100; ++i) res.rows.push_back({rows[i].second, -rows[i].first});
  return res;
}

/// Evaluates query id over a single-node database (P = 1).
inline QueryResult run(const Database& db, int id, const QueryParams& params = {}) {
  if (db.P != 1) throw InvalidArgument("oracle needs an unpartitioned database");
  switch (id) {
    case 1: return q1(db, params);
    case 2: return q2(db, params);
    case 3: return q3(db, params);
    case 4: return q4(db, params);
    case 5: return q5(db, params);
    case 11: return q11(db, params);
    case 13: return q13(db, params);
    case 14: return q14(db, params);
    case 15: return q15(db, params);
    case 18: return q18(db, params);
    case 21: return q21(db, params);
    default: throw InvalidArgument("query " + std::to_string(id) + " is not implemented");
  }
}

}  // namespace olapnet::queries::oracle
