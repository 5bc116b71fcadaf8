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

#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "olapnet/cluster.hpp"
#include "olapnet/distops.hpp"
#include "olapnet/error.hpp"
#include "olapnet/tpch.hpp"
#include "olapnet/value.hpp"

namespace olapnet::queries {

using tpch::Database;
using tpch::TableId;

inline constexpr std::array<int, 11> kQueryIds = {1, 2, 3, 4, 5, 11, 13, 14, 15, 18, 21};

inline const std::vector<std::string>& variants(int query) {
  static const std::vector<std::string> q3 = {"bitset", "lazy", "repl_attr"};
  static const std::vector<std::string> q15 = {"naive", "naive_1factor", "approx"};
  static const std::vector<std::string> q21 = {"bitset", "late", "repl_attr"};
  static const std::vector<std::string> plain = {"default"};
  if (std::find(kQueryIds.begin(), kQueryIds.end(), query) == kQueryIds.end())
    throw InvalidArgument("query " + std::to_string(query) + " is not implemented");
  return query == 3 ? q3 : query == 15 ? q15 : query == 21 ? q21 : plain;
}

inline std::string default_variant(int query) { return variants(query).front(); }

inline void check_variant(int query, const std::string& variant) {
  const auto& v = variants(query);
  if (std::find(v.begin(), v.end(), variant) == v.end())
    throw InvalidArgument("query " + std::to_string(query) + " has no variant '" + variant + "'");
}

/// Query parameters as strings; each query reads them with its own defaults.
class QueryParams {
 public:
  QueryParams() = default;
  QueryParams(std::initializer_list<std::pair<const std::string, std::string>> kv) : kv_(kv) {}

  /// Parses "k=v,k=v". Empty input gives no parameters.
  static QueryParams parse(std::string_view s) {
    QueryParams p;
    while (!s.empty()) {
      auto comma = s.find(',');
      auto item = s.substr(0, comma);
      auto eq = item.find('=');
      if (eq == std::string_view::npos || eq == 0)
        throw InvalidArgument("parameter '" + std::string(item) + "' is not key=value");
      p.set(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
      if (comma == std::string_view::npos) break;
      s.remove_prefix(comma + 1);
    }
    return p;
  }

  void set(std::string k, std::string v) { kv_[std::move(k)] = std::move(v); }
  bool has(const std::string& k) const { return kv_.count(k) != 0; }
  const std::map<std::string, std::string>& items() const { return kv_; }

  std::string str(const std::string& k, const std::string& def) const {
    auto it = kv_.find(k);
    return it == kv_.end() ? def : it->second;
  }

  std::int64_t integer(const std::string& k, std::int64_t def) const {
    auto it = kv_.find(k);
    if (it == kv_.end()) return def;
    try {
      std::size_t used = 0;
      auto v = std::stoll(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw InvalidArgument("parameter " + k + "='" + it->second + "' is not an integer");
    }
  }

  std::int64_t day(const std::string& k, const std::string& def) const { return date::parse(str(k, def)); }

  /// Rejects keys the query does not know.
  void check_keys(int query, std::initializer_list<std::string_view> allowed) const {
    for (const auto& [k, v] : kv_)
      if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
        throw InvalidArgument("query " + std::to_string(query) + " has no parameter '" + k + "'");
  }

 private:
  std::map<std::string, std::string> kv_;
};

/// Dictionary code of s in d, or -1.
inline std::int64_t dict_code(const tpch::Dict& d, std::string_view s) {
  for (std::size_t i = 0; i < d->size(); ++i)
    if ((*d)[i] == s) return static_cast<std::int64_t>(i);
  return -1;
}

/// Per-entry LIKE evaluation over a column's dictionary.
inline std::vector<bool> like_mask(const Column& c, std::string_view pattern) {
  std::vector<bool> m(c.dictionary->size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = tpch::like((*c.dictionary)[i], pattern);
  return m;
}

inline std::int64_t nation_key(const Database& db, std::string_view name) {
  const auto& n = db.nation.col("n_name");
  for (std::size_t i = 0; i < n.size(); ++i)
    if (n.str(i) == name) return db.nation.col("n_nationkey")[i];
  return -1;
}

inline std::int64_t region_key(const Database& db, std::string_view name) {
  const auto& n = db.region.col("r_name");
  for (std::size_t i = 0; i < n.size(); ++i)
    if (n.str(i) == name) return db.region.col("r_regionkey")[i];
  return -1;
}

/// Nation keys belonging to a region, as a 25-entry mask indexed by nation key.
inline std::vector<bool> nations_in_region(const Database& db, std::int64_t region) {
  std::vector<bool> m(static_cast<std::size_t>(db.nation.row_count()), false);
  const auto& nk = db.nation.col("n_nationkey");
  const auto& rk = db.nation.col("n_regionkey");
  for (std::size_t i = 0; i < nk.size(); ++i)
    if (rk[i] == region) m[static_cast<std::size_t>(nk[i])] = true;
  return m;
}

inline std::string nation_name(const Database& db, std::int64_t key) {
  const auto& nk = db.nation.col("n_nationkey");
  for (std::size_t i = 0; i < nk.size(); ++i)
    if (nk[i] == key) return std::string(db.nation.col("n_name").str(i));
  throw InvalidArgument("unknown nation key " + std::to_string(key));
}

/// Q11 fraction 0.0001 / sf as an exact rational num / den.
struct Fraction {
  std::int64_t num = 1;
  std::int64_t den = 1;
};

inline Fraction q11_fraction(const QueryParams& p, double sf) {
  if (p.has("FRACTION_DEN")) return {1, p.integer("FRACTION_DEN", 1)};
  return {1000000, std::max<std::int64_t>(1, std::llround(sf * 1e10))};
}

inline std::string replicated_key(TableId t, std::string_view column) {
  return std::string(tpch::table_name(t)) + "." + std::string(column);
}

/// Copies one integer column of a partitioned table to every node, indexed by global row.
inline void replicate_column(ClusterCtx& ctx, Database& db, TableId t, std::string_view column) {
  auto key = replicated_key(t, column);
  const auto& c = db.table(t).col(column);
  ByteWriter w;
  for (auto v : c.values) w.put_svarint(v);
  auto parts = ctx.allgather(w.take());
  std::vector<std::int64_t> all;
  all.reserve(static_cast<std::size_t>(db.layout(t).total_rows()));
  for (const auto& p : parts) {
    ByteReader r(p);
    while (!r.empty()) all.push_back(r.get_svarint());
  }
  if (static_cast<std::int64_t>(all.size()) != db.layout(t).total_rows())
    throw ProtocolError("replicated column " + key + " has wrong length");
  db.replicated[key] = std::move(all);
}

inline const std::vector<std::int64_t>& replicated(const Database& db, TableId t, std::string_view column) {
  auto key = replicated_key(t, column);
  const auto* c = db.replicated_column(key);
  if (c == nullptr) throw InvalidArgument("column " + key + " is not replicated; run prepare first");
  return *c;
}

/// Columns a query/variant expects to be replicated before it runs.
inline std::vector<std::pair<TableId, std::string>> replicated_inputs(int query, const std::string& variant) {
  if (query == 3 && variant == "repl_attr") return {{TableId::Customer, "c_mktsegment"}};
  if (query == 5 || (query == 21 && variant == "repl_attr")) return {{TableId::Supplier, "s_nationkey"}};
  return {};
}

/// Load-time preparation: replicates the join attribute a plan reads locally.
inline void prepare(ClusterCtx& ctx, Database& db, int query, const std::string& variant) {
  check_variant(query, variant);
  for (const auto& [t, c] : replicated_inputs(query, variant))
    if (db.replicated_column(replicated_key(t, c)) == nullptr) replicate_column(ctx, db, t, c);
}

/// Money of an extended price times (100 - discount percent): scale 4.
inline std::int64_t disc_price(std::int64_t ep, std::int64_t disc) { return ep * (100 - disc); }

/// Sorted unique (key, count) pairs to key owners: [blob: delta-varint keys][varint counts].
inline std::vector<Bytes> encode_keyed_counts(const std::vector<std::map<std::int64_t, std::int64_t>>& per_owner) {
  std::vector<Bytes> out;
  for (const auto& m : per_owner) {
    std::vector<std::uint64_t> keys;
    for (const auto& [k, c] : m) keys.push_back(static_cast<std::uint64_t>(k));
    ByteWriter w;
    w.put_blob(codec::delta_varint_encode(keys).bytes);
    for (const auto& [k, c] : m) w.put_varint(static_cast<std::uint64_t>(c));
    out.push_back(w.take());
  }
  return out;
}

inline std::vector<std::pair<std::int64_t, std::int64_t>> decode_keyed_counts(std::span<const std::uint8_t> b,
                                                                              const RowRange& mine) {
  ByteReader r(b);
  auto blob = r.get_blob();
  ByteReader kr(blob);
  auto keys = codec::read_delta_varint(kr);
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  for (auto k : keys) {
    if (static_cast<std::int64_t>(k) < mine.first || static_cast<std::int64_t>(k) >= mine.end())
      throw ProtocolError("count for row " + std::to_string(k) + " sent to a node that does not own it");
    out.emplace_back(static_cast<std::int64_t>(k), static_cast<std::int64_t>(r.get_varint()));
  }
  if (!r.empty()) throw ProtocolError("keyed counts: trailing bytes");
  return out;
}

/// Sends per-row counts to the owners of the rows and returns the summed counts
/// for this node's rows, indexed by local row.
inline std::vector<std::int64_t> sum_counts_at_owners(ClusterCtx& ctx, const std::map<std::int64_t, std::int64_t>& counts,
                                                      const PartitionLayout& layout) {
  std::vector<std::map<std::int64_t, std::int64_t>> per_owner(static_cast<std::size_t>(ctx.size()));
  for (const auto& [row, c] : counts) per_owner[static_cast<std::size_t>(layout.owner(row))][row] += c;
  auto in = ctx.all_to_all_1factor(encode_keyed_counts(per_owner));
  const auto& mine = layout.range(ctx.rank());
  std::vector<std::int64_t> total(static_cast<std::size_t>(mine.count), 0);
  for (const auto& b : in)
    for (const auto& [row, c] : decode_keyed_counts(b, mine)) total[static_cast<std::size_t>(row - mine.first)] += c;
  return total;
}

}  // namespace olapnet::queries
