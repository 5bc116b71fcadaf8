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
 * @file tpch.hpp
 * @brief TPC-H style data: chunked deterministic generation, .tbl ingestion,
 *        and the per-node Database with its join indexes.
 *
 * Every value is a pure function of (seed, table, global row, field), so a
 * node generates its chunk without seeing the others and the P chunks
 * concatenate to the single-node table. Lineitems are generated per order
 * and chunked at order boundaries; partsupp rows (four per part) follow
 * their part. Both pairs stay co-partitioned. NATION and REGION are
 * replicated on every node.
 *
 * Keys are dense and 1-based, so key - 1 is the global row.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "olapnet/date.hpp"
#include "olapnet/error.hpp"
#include "olapnet/storage.hpp"
#include "olapnet/value.hpp"

namespace olapnet::tpch {

enum class TableId : std::uint8_t { Region, Nation, Supplier, Customer, Part, PartSupp, Orders, Lineitem };

inline constexpr std::array<TableId, 8> kAllTables = {TableId::Region,   TableId::Nation,   TableId::Supplier,
                                                      TableId::Customer, TableId::Part,     TableId::PartSupp,
                                                      TableId::Orders,   TableId::Lineitem};

inline std::string_view table_name(TableId t) {
  static constexpr std::array<std::string_view, 8> names = {"region", "nation", "supplier", "customer",
                                                            "part",   "partsupp", "orders", "lineitem"};
  return names[static_cast<std::size_t>(t)];
}

inline TableId parse_table(std::string_view name) {
  for (auto t : kAllTables)
    if (table_name(t) == name) return t;
  throw InvalidArgument("unknown table '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// value domains

using Dict = std::shared_ptr<const std::vector<std::string>>;

inline Dict make_dict(std::vector<std::string> v) { return std::make_shared<const std::vector<std::string>>(std::move(v)); }

inline const Dict& region_names() {
  static const Dict d = make_dict({"AFRICA", "AMERICA", "ASIA", "EUROPE", "MIDDLE EAST"});
  return d;
}

inline const Dict& nation_names() {
  static const Dict d = make_dict({"ALGERIA", "ARGENTINA", "BRAZIL",     "CANADA",  "EGYPT",   "ETHIOPIA",
                                   "FRANCE",  "GERMANY",   "INDIA",      "INDONESIA", "IRAN",  "IRAQ",
                                   "JAPAN",   "JORDAN",    "KENYA",      "MOROCCO", "MOZAMBIQUE", "PERU",
                                   "CHINA",   "ROMANIA",   "SAUDI ARABIA", "VIETNAM", "RUSSIA", "UNITED KINGDOM",
                                   "UNITED STATES"});
  return d;
}

inline constexpr std::array<std::int64_t, 25> kNationRegion = {0, 1, 1, 1, 4, 0, 3, 3, 2, 2, 4, 4, 2,
                                                               4, 0, 0, 0, 1, 2, 3, 4, 2, 3, 3, 1};

inline const Dict& segments() {
  static const Dict d = make_dict({"AUTOMOBILE", "BUILDING", "FURNITURE", "MACHINERY", "HOUSEHOLD"});
  return d;
}

inline const Dict& priorities() {
  static const Dict d = make_dict({"1-URGENT", "2-HIGH", "3-MEDIUM", "4-NOT SPECIFIED", "5-LOW"});
  return d;
}

inline const Dict& part_types() {
  static const Dict d = [] {
    std::vector<std::string> v;
    for (auto a : {"STANDARD", "SMALL", "MEDIUM", "LARGE", "ECONOMY", "PROMO"})
      for (auto b : {"ANODIZED", "BURNISHED", "PLATED", "POLISHED", "BRUSHED"})
        for (auto c : {"TIN", "NICKEL", "BRASS", "STEEL", "COPPER"})
          v.push_back(std::string(a) + " " + b + " " + c);
    return make_dict(std::move(v));
  }();
  return d;
}

inline const Dict& manufacturers() {
  static const Dict d = make_dict({"Manufacturer#1", "Manufacturer#2", "Manufacturer#3", "Manufacturer#4",
                                   "Manufacturer#5"});
  return d;
}

inline const Dict& return_flags() {
  static const Dict d = make_dict({"A", "N", "R"});
  return d;
}

inline const Dict& line_statuses() {
  static const Dict d = make_dict({"F", "O"});
  return d;
}

inline const Dict& order_statuses() {
  static const Dict d = make_dict({"F", "O", "P"});
  return d;
}

inline constexpr std::int64_t kStartDate = date::from_ymd(1992, 1, 1);
inline constexpr std::int64_t kEndDate = date::from_ymd(1998, 12, 31);
inline constexpr std::int64_t kCurrentDate = date::from_ymd(1995, 6, 17);

// ---------------------------------------------------------------------------
// counter-based random streams

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t draw(std::uint64_t seed, TableId t, std::uint64_t row, std::uint32_t field) {
  return mix64(mix64(seed ^ (static_cast<std::uint64_t>(t) + 1) * 0xd1b54a32d192ed03ull) ^ (row * 256 + field));
}

/// Uniform in [lo, hi].
inline std::int64_t uniform(std::uint64_t r, std::int64_t lo, std::int64_t hi) {
  auto span = static_cast<u128>(hi - lo + 1);
  return lo + static_cast<std::int64_t>((static_cast<u128>(r) * span) >> 64);
}

inline std::string random_text(std::uint64_t r, int min_len, int max_len) {
  static constexpr std::string_view alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 ,.";
  std::uint64_t s = r;
  auto len = uniform(s, min_len, max_len);
  std::string out;
  out.reserve(static_cast<std::size_t>(len));
  for (std::int64_t i = 0; i < len; ++i) {
    s = mix64(s);
    out.push_back(alphabet[static_cast<std::size_t>(uniform(s, 0, static_cast<std::int64_t>(alphabet.size()) - 1))]);
  }
  return out;
}

/// Order comments come from a fixed phrase list so LIKE filters are evaluated per dictionary entry.
inline const Dict& order_comments() {
  static const Dict d = [] {
    static constexpr std::array<std::string_view, 24> words = {
        "special", "requests", "pending",  "unusual", "express", "packages", "accounts", "deposits",
        "furiously", "quickly", "carefully", "blithely", "slyly", "regular", "final",   "ironic",
        "bold",    "even",     "silent",   "theodolites", "foxes", "ideas", "instructions", "pinto beans"};
    std::vector<std::string> v;
    for (std::uint64_t i = 0; i < 512; ++i) {
      std::uint64_t s = mix64(0x6f6c61706e6574ull + i);
      auto n = uniform(s, 4, 7);
      std::string phrase;
      for (std::int64_t w = 0; w < n; ++w) {
        s = mix64(s);
        if (!phrase.empty()) phrase += ' ';
        phrase += words[static_cast<std::size_t>(uniform(s, 0, words.size() - 1))];
      }
      v.push_back(std::move(phrase));
    }
    return make_dict(std::move(v));
  }();
  return d;
}

/// SQL LIKE with only '%' wildcards.
inline bool like(std::string_view s, std::string_view pattern) {
  std::size_t pos = 0;
  bool anchored = true;
  while (!pattern.empty()) {
    auto pct = pattern.find('%');
    auto piece = pattern.substr(0, pct);
    if (!piece.empty()) {
      if (anchored) {
        if (s.substr(pos, piece.size()) != piece) return false;
        pos += piece.size();
      } else {
        bool last = pct == std::string_view::npos;
        auto found = last ? (s.size() >= piece.size() + pos && s.substr(s.size() - piece.size()) == piece
                                 ? s.size() - piece.size()
                                 : std::string_view::npos)
                          : s.find(piece, pos);
        if (found == std::string_view::npos) return false;
        pos = found + piece.size();
      }
    }
    if (pct == std::string_view::npos) return pos == s.size();
    anchored = false;
    pattern.remove_prefix(pct + 1);
  }
  return anchored ? pos == s.size() : true;
}

// ---------------------------------------------------------------------------
// generator

struct GenConfig {
  double sf = 0.01;
  int P = 1;
  int rank = 0;
  std::uint64_t seed = 20150101;
};

inline constexpr std::uint64_t kDefaultSeed = 20150101;

/// Seed from OLAPNET_SEED if set.
inline std::uint64_t seed_from_env(std::uint64_t fallback = kDefaultSeed) {
  if (const char* s = std::getenv("OLAPNET_SEED"); s != nullptr && *s != '\0') {
    try {
      return std::stoull(s, nullptr, 0);
    } catch (const std::exception&) {
      throw InvalidArgument(std::string("OLAPNET_SEED is not an integer: ") + s);
    }
  }
  return fallback;
}

inline void check_config(const GenConfig& cfg) {
  if (!(cfg.sf > 0) || !std::isfinite(cfg.sf)) throw InvalidArgument("scale factor must be positive");
  if (cfg.P < 1) throw InvalidArgument("P must be >= 1");
  if (cfg.rank < 0 || cfg.rank >= cfg.P) throw InvalidArgument("rank outside [0, P)");
}

inline std::int64_t scaled(double sf, double base) {
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::llround(sf * base)));
}

struct Cardinalities {
  std::int64_t supplier, customer, part, partsupp, orders;
};

inline Cardinalities cardinalities(double sf) {
  auto part = scaled(sf, 200000);
  return {scaled(sf, 10000), scaled(sf, 150000), part, part * 4, scaled(sf, 1500000)};
}

inline std::int64_t retail_price_cents(std::int64_t partkey) {
  return 90000 + ((partkey / 10) % 20001) + 100 * (partkey % 1000);
}

/// Supplier of the i-th partsupp row of a part, i in [0, 4).
inline std::int64_t partsupp_suppkey(std::int64_t partkey, int i, std::int64_t suppliers) {
  return (partkey + i * (suppliers / 4 + (partkey - 1) / suppliers)) % suppliers + 1;
}

/// Customers whose key is a multiple of 3 place no orders.
inline std::int64_t nth_ordering_customer(std::int64_t n) { return n + n / 2 + 1; }

enum Field : std::uint32_t {
  F_NATION, F_ADDRESS, F_PHONE, F_ACCTBAL, F_SEGMENT, F_MFGR, F_TYPE, F_SIZE, F_AVAILQTY, F_SUPPLYCOST,
  F_CUSTKEY, F_ORDERDATE, F_PRIORITY, F_COMMENT, F_LINECOUNT, F_PARTKEY, F_SUPPIDX, F_QUANTITY, F_DISCOUNT,
  F_TAX, F_SHIPDELAY, F_COMMITDELAY, F_RECEIPTDELAY, F_RETURNFLAG,
};

struct LineValues {
  std::int64_t partkey, suppkey, quantity, extendedprice, discount, tax;
  std::int64_t shipdate, commitdate, receiptdate;
  std::int64_t returnflag, linestatus;  // codes into return_flags(), line_statuses()
};

inline std::int64_t lines_of_order(std::uint64_t seed, std::int64_t order_row) {
  return uniform(draw(seed, TableId::Orders, static_cast<std::uint64_t>(order_row), F_LINECOUNT), 1, 7);
}

inline std::int64_t order_date(std::uint64_t seed, std::int64_t order_row) {
  return uniform(draw(seed, TableId::Orders, static_cast<std::uint64_t>(order_row), F_ORDERDATE), kStartDate,
                 kEndDate - 151);
}

inline LineValues line_values(std::uint64_t seed, const Cardinalities& card, std::int64_t order_row, int line) {
  auto row = static_cast<std::uint64_t>(order_row) * 8 + static_cast<std::uint64_t>(line);
  auto d = [&](Field f) { return draw(seed, TableId::Lineitem, row, f); };
  LineValues v{};
  v.partkey = uniform(d(F_PARTKEY), 1, card.part);
  v.suppkey = partsupp_suppkey(v.partkey, static_cast<int>(uniform(d(F_SUPPIDX), 0, 3)), card.supplier);
  v.quantity = uniform(d(F_QUANTITY), 1, 50);
  v.extendedprice = v.quantity * retail_price_cents(v.partkey);
  v.discount = uniform(d(F_DISCOUNT), 0, 10);
  v.tax = uniform(d(F_TAX), 0, 8);
  auto od = order_date(seed, order_row);
  v.shipdate = od + uniform(d(F_SHIPDELAY), 1, 121);
  v.commitdate = od + uniform(d(F_COMMITDELAY), 30, 90);
  v.receiptdate = v.shipdate + uniform(d(F_RECEIPTDELAY), 1, 30);
  v.returnflag = v.receiptdate <= kCurrentDate ? (uniform(d(F_RETURNFLAG), 0, 1) == 0 ? 0 : 2) : 1;
  v.linestatus = v.shipdate > kCurrentDate ? 1 : 0;
  return v;
}

/// Global partition layout of a table under P-way chunking.
inline PartitionLayout table_layout(const GenConfig& cfg, TableId t) {
  auto card = cardinalities(cfg.sf);
  switch (t) {
    case TableId::Region:
    case TableId::Nation: {
      std::int64_t n = t == TableId::Region ? 5 : 25;
      std::vector<RowRange> r(static_cast<std::size_t>(cfg.P), RowRange{n, 0});
      r[0] = {0, n};
      return PartitionLayout(std::move(r));
    }
    case TableId::Supplier: return PartitionLayout::even(card.supplier, cfg.P);
    case TableId::Customer: return PartitionLayout::even(card.customer, cfg.P);
    case TableId::Part: return PartitionLayout::even(card.part, cfg.P);
    case TableId::Orders: return PartitionLayout::even(card.orders, cfg.P);
    case TableId::PartSupp: {
      auto parts = range_partition(card.part, cfg.P);
      for (auto& r : parts) r = {r.first * 4, r.count * 4};
      return PartitionLayout(std::move(parts));
    }
    case TableId::Lineitem: {
      auto orders = range_partition(card.orders, cfg.P);
      std::vector<RowRange> out;
      std::int64_t first = 0;
      for (const auto& r : orders) {
        std::int64_t n = 0;
        for (std::int64_t o = r.first; o < r.end(); ++o) n += lines_of_order(cfg.seed, o);
        out.push_back({first, n});
        first += n;
      }
      return PartitionLayout(std::move(out));
    }
  }
  throw InvalidArgument("unknown table");
}

inline bool is_replicated(TableId t) { return t == TableId::Region || t == TableId::Nation; }

namespace detail {

struct TextColumn {
  std::vector<std::int64_t> codes;
  std::vector<std::string> dict;

  void push(std::string s) {
    codes.push_back(static_cast<std::int64_t>(dict.size()));
    dict.push_back(std::move(s));
  }
  Column finish() { return Column::strings(std::move(codes), make_dict(std::move(dict))); }
};

inline std::string keyed_name(const char* prefix, std::int64_t key) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s#%09lld", prefix, static_cast<long long>(key));
  return buf;
}

inline std::string phone(std::uint64_t r, std::int64_t nation) {
  char buf[64];
  std::uint64_t s = mix64(r);
  auto a = uniform(s, 100, 999);
  s = mix64(s);
  auto b = uniform(s, 100, 999);
  s = mix64(s);
  auto c = uniform(s, 1000, 9999);
  std::snprintf(buf, sizeof buf, "%02lld-%03lld-%03lld-%04lld", static_cast<long long>(nation + 10),
                static_cast<long long>(a), static_cast<long long>(b), static_cast<long long>(c));
  return buf;
}

}  // namespace detail

/// Generates this node's chunk of one table.
inline ColumnTable generate_chunk(const GenConfig& cfg, TableId t) {
  check_config(cfg);
  const auto card = cardinalities(cfg.sf);
  const auto layout = table_layout(cfg, t);
  const bool repl = is_replicated(t);
  PartitionInfo info = layout.info(repl ? 0 : cfg.rank, repl);
  info.node_id = cfg.rank;
  ColumnTable out(std::string(table_name(t)), info);
  const std::int64_t first = info.first_global_row;
  const std::int64_t n = info.row_count;
  const std::uint64_t seed = cfg.seed;
  auto rnd = [&](std::int64_t row, Field f) { return draw(seed, t, static_cast<std::uint64_t>(row), f); };

  switch (t) {
    case TableId::Region: {
      out.add_column("r_regionkey", Column::ints({0, 1, 2, 3, 4}));
      out.add_column("r_name", Column::strings({0, 1, 2, 3, 4}, region_names()));
      break;
    }
    case TableId::Nation: {
      std::vector<std::int64_t> keys(25);
      for (int i = 0; i < 25; ++i) keys[static_cast<std::size_t>(i)] = i;
      out.add_column("n_nationkey", Column::ints(keys));
      out.add_column("n_name", Column::strings(keys, nation_names()));
      out.add_column("n_regionkey", Column::ints(std::vector<std::int64_t>(kNationRegion.begin(), kNationRegion.end())));
      break;
    }
    case TableId::Supplier:
    case TableId::Customer: {
      bool supp = t == TableId::Supplier;
      std::vector<std::int64_t> key, nation, acct, seg;
      detail::TextColumn name, addr, ph;
      for (std::int64_t g = first; g < first + n; ++g) {
        key.push_back(g + 1);
        auto nk = uniform(rnd(g, F_NATION), 0, 24);
        nation.push_back(nk);
        acct.push_back(uniform(rnd(g, F_ACCTBAL), -99999, 999999));
        name.push(detail::keyed_name(supp ? "Supplier" : "Customer", g + 1));
        addr.push(random_text(rnd(g, F_ADDRESS), 10, 40));
        ph.push(detail::phone(rnd(g, F_PHONE), nk));
        if (!supp) seg.push_back(uniform(rnd(g, F_SEGMENT), 0, 4));
      }
      const std::string p = supp ? "s_" : "c_";
      out.add_column(p + (supp ? "suppkey" : "custkey"), Column::ints(std::move(key)));
      out.add_column(p + "name", name.finish());
      out.add_column(p + "address", addr.finish());
      out.add_column(p + "nationkey", Column::ints(std::move(nation)));
      out.add_column(p + "phone", ph.finish());
      out.add_column(p + "acctbal", Column::decimals(std::move(acct)));
      if (!supp) out.add_column("c_mktsegment", Column::strings(std::move(seg), segments()));
      break;
    }
    case TableId::Part: {
      std::vector<std::int64_t> key, mfgr, type, size, price;
      for (std::int64_t g = first; g < first + n; ++g) {
        key.push_back(g + 1);
        mfgr.push_back(uniform(rnd(g, F_MFGR), 0, 4));
        type.push_back(uniform(rnd(g, F_TYPE), 0, 149));
        size.push_back(uniform(rnd(g, F_SIZE), 1, 50));
        price.push_back(retail_price_cents(g + 1));
      }
      out.add_column("p_partkey", Column::ints(std::move(key)));
      out.add_column("p_mfgr", Column::strings(std::move(mfgr), manufacturers()));
      out.add_column("p_type", Column::strings(std::move(type), part_types()));
      out.add_column("p_size", Column::ints(std::move(size)));
      out.add_column("p_retailprice", Column::decimals(std::move(price)));
      break;
    }
    case TableId::PartSupp: {
      std::vector<std::int64_t> pk, sk, qty, cost;
      for (std::int64_t g = first; g < first + n; ++g) {
        std::int64_t partkey = g / 4 + 1;
        pk.push_back(partkey);
        sk.push_back(partsupp_suppkey(partkey, static_cast<int>(g % 4), card.supplier));
        qty.push_back(uniform(rnd(g, F_AVAILQTY), 1, 9999));
        cost.push_back(uniform(rnd(g, F_SUPPLYCOST), 100, 100000));
      }
      out.add_column("ps_partkey", Column::ints(std::move(pk)));
      out.add_column("ps_suppkey", Column::ints(std::move(sk)));
      out.add_column("ps_availqty", Column::ints(std::move(qty)));
      out.add_column("ps_supplycost", Column::decimals(std::move(cost)));
      break;
    }
    case TableId::Orders: {
      std::vector<std::int64_t> key, cust, status, total, odate, prio, shipprio, comment;
      const std::int64_t ordering_customers = card.customer - card.customer / 3;
      for (std::int64_t g = first; g < first + n; ++g) {
        key.push_back(g + 1);
        cust.push_back(nth_ordering_customer(uniform(rnd(g, F_CUSTKEY), 0, ordering_customers - 1)));
        odate.push_back(order_date(seed, g));
        prio.push_back(uniform(rnd(g, F_PRIORITY), 0, 4));
        shipprio.push_back(0);
        comment.push_back(uniform(rnd(g, F_COMMENT), 0, static_cast<std::int64_t>(order_comments()->size()) - 1));
        std::int64_t lines = lines_of_order(seed, g), shipped = 0;
        i128 price = 0;
        for (int l = 1; l <= lines; ++l) {
          auto lv = line_values(seed, card, g, l);
          shipped += lv.linestatus == 0;
          price += static_cast<i128>(lv.extendedprice) * (100 + lv.tax) * (100 - lv.discount);
        }
        total.push_back(static_cast<std::int64_t>((price + 5000) / 10000));
        status.push_back(shipped == lines ? 0 : (shipped == 0 ? 1 : 2));
      }
      out.add_column("o_orderkey", Column::ints(std::move(key)));
      out.add_column("o_custkey", Column::ints(std::move(cust)));
      out.add_column("o_orderstatus", Column::strings(std::move(status), order_statuses()));
      out.add_column("o_totalprice", Column::decimals(std::move(total)));
      out.add_column("o_orderdate", Column::dates(std::move(odate)));
      out.add_column("o_orderpriority", Column::strings(std::move(prio), priorities()));
      out.add_column("o_shippriority", Column::ints(std::move(shipprio)));
      out.add_column("o_comment", Column::strings(std::move(comment), order_comments()));
      break;
    }
    case TableId::Lineitem: {
      auto orders = range_partition(card.orders, cfg.P)[static_cast<std::size_t>(cfg.rank)];
      std::vector<std::int64_t> ok, pk, sk, ln, qty, ep, disc, tax, rf, ls, sd, cd, rd;
      for (auto* v : {&ok, &pk, &sk, &ln, &qty, &ep, &disc, &tax, &rf, &ls, &sd, &cd, &rd})
        v->reserve(static_cast<std::size_t>(n));
      for (std::int64_t o = orders.first; o < orders.end(); ++o) {
        std::int64_t lines = lines_of_order(seed, o);
        for (int l = 1; l <= lines; ++l) {
          auto v = line_values(seed, card, o, l);
          ok.push_back(o + 1);
          pk.push_back(v.partkey);
          sk.push_back(v.suppkey);
          ln.push_back(l);
          qty.push_back(v.quantity);
          ep.push_back(v.extendedprice);
          disc.push_back(v.discount);
          tax.push_back(v.tax);
          rf.push_back(v.returnflag);
          ls.push_back(v.linestatus);
          sd.push_back(v.shipdate);
          cd.push_back(v.commitdate);
          rd.push_back(v.receiptdate);
        }
      }
      out.add_column("l_orderkey", Column::ints(std::move(ok)));
      out.add_column("l_partkey", Column::ints(std::move(pk)));
      out.add_column("l_suppkey", Column::ints(std::move(sk)));
      out.add_column("l_linenumber", Column::ints(std::move(ln)));
      out.add_column("l_quantity", Column::ints(std::move(qty)));
      out.add_column("l_extendedprice", Column::decimals(std::move(ep)));
      out.add_column("l_discount", Column::decimals(std::move(disc)));
      out.add_column("l_tax", Column::decimals(std::move(tax)));
      out.add_column("l_returnflag", Column::strings(std::move(rf), return_flags()));
      out.add_column("l_linestatus", Column::strings(std::move(ls), line_statuses()));
      out.add_column("l_shipdate", Column::dates(std::move(sd)));
      out.add_column("l_commitdate", Column::dates(std::move(cd)));
      out.add_column("l_receiptdate", Column::dates(std::move(rd)));
      break;
    }
  }
  return out;
}

inline ColumnTable generate_chunk(const GenConfig& cfg, std::string_view table) {
  return generate_chunk(cfg, parse_table(table));
}

// ---------------------------------------------------------------------------
// reassembly

/// Concatenates partitions in node order into one single-node table.
inline ColumnTable concatenate(std::span<const ColumnTable> parts) {
  if (parts.empty()) throw InvalidArgument("concatenate: no partitions");
  if (parts.front().partition().replicated) {
    auto t = parts.front();
    return t;
  }
  std::int64_t total = 0;
  for (const auto& p : parts) total += p.row_count();
  ColumnTable out(parts.front().name(), PartitionInfo{total, 0, 1, 0, total, false});
  for (std::size_t c = 0; c < parts.front().columns().size(); ++c) {
    const auto& [name, proto] = parts.front().columns()[c];
    Column col{proto.kind, {}, proto.dictionary};
    bool shared_dict = std::all_of(parts.begin(), parts.end(),
                                   [&](const ColumnTable& p) { return p.columns()[c].second.dictionary == proto.dictionary; });
    if (proto.kind == ColumnKind::DictString && !shared_dict) {
      detail::TextColumn text;
      for (const auto& p : parts) {
        const auto& pc = p.columns()[c].second;
        for (std::size_t i = 0; i < pc.size(); ++i) text.push(std::string(pc.str(i)));
      }
      col = text.finish();
    } else {
      for (const auto& p : parts) {
        const auto& v = p.columns()[c].second.values;
        col.values.insert(col.values.end(), v.begin(), v.end());
      }
    }
    out.add_column(name, std::move(col));
  }
  return out;
}

inline bool same_table(const ColumnTable& a, const ColumnTable& b) {
  if (a.name() != b.name() || a.row_count() != b.row_count() || a.columns().size() != b.columns().size()) return false;
  for (std::size_t c = 0; c < a.columns().size(); ++c) {
    if (a.columns()[c].first != b.columns()[c].first) return false;
    if (!same_contents(a.columns()[c].second, b.columns()[c].second)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// .tbl files

enum class Domain : std::uint8_t { None, Free, Region, Nation, Segment, Priority, PartType, Mfgr, ReturnFlag, LineStatus, OrderStatus };

struct FieldSpec {
  std::string_view name;  // empty: not modeled, skipped on load and written empty
  ColumnKind kind;
  Domain domain;
};

inline const Dict& domain_dict(Domain d) {
  switch (d) {
    case Domain::Region: return region_names();
    case Domain::Nation: return nation_names();
    case Domain::Segment: return segments();
    case Domain::Priority: return priorities();
    case Domain::PartType: return part_types();
    case Domain::Mfgr: return manufacturers();
    case Domain::ReturnFlag: return return_flags();
    case Domain::LineStatus: return line_statuses();
    case Domain::OrderStatus: return order_statuses();
    default: break;
  }
  throw InvalidArgument("domain has no fixed dictionary");
}

/// dbgen column layout per table.
inline const std::vector<FieldSpec>& tbl_layout(TableId t) {
  using K = ColumnKind;
  using D = Domain;
  static const std::map<TableId, std::vector<FieldSpec>> layouts = {
      {TableId::Region, {{"r_regionkey", K::Int64, D::None}, {"r_name", K::DictString, D::Region}, {"", K::DictString, D::Free}}},
      {TableId::Nation,
       {{"n_nationkey", K::Int64, D::None}, {"n_name", K::DictString, D::Nation}, {"n_regionkey", K::Int64, D::None},
        {"", K::DictString, D::Free}}},
      {TableId::Supplier,
       {{"s_suppkey", K::Int64, D::None}, {"s_name", K::DictString, D::Free}, {"s_address", K::DictString, D::Free},
        {"s_nationkey", K::Int64, D::None}, {"s_phone", K::DictString, D::Free}, {"s_acctbal", K::Decimal, D::None},
        {"", K::DictString, D::Free}}},
      {TableId::Customer,
       {{"c_custkey", K::Int64, D::None}, {"c_name", K::DictString, D::Free}, {"c_address", K::DictString, D::Free},
        {"c_nationkey", K::Int64, D::None}, {"c_phone", K::DictString, D::Free}, {"c_acctbal", K::Decimal, D::None},
        {"c_mktsegment", K::DictString, D::Segment}, {"", K::DictString, D::Free}}},
      {TableId::Part,
       {{"p_partkey", K::Int64, D::None}, {"", K::DictString, D::Free}, {"p_mfgr", K::DictString, D::Mfgr},
        {"", K::DictString, D::Free}, {"p_type", K::DictString, D::PartType}, {"p_size", K::Int64, D::None},
        {"", K::DictString, D::Free}, {"p_retailprice", K::Decimal, D::None}, {"", K::DictString, D::Free}}},
      {TableId::PartSupp,
       {{"ps_partkey", K::Int64, D::None}, {"ps_suppkey", K::Int64, D::None}, {"ps_availqty", K::Int64, D::None},
        {"ps_supplycost", K::Decimal, D::None}, {"", K::DictString, D::Free}}},
      {TableId::Orders,
       {{"o_orderkey", K::Int64, D::None}, {"o_custkey", K::Int64, D::None},
        {"o_orderstatus", K::DictString, D::OrderStatus}, {"o_totalprice", K::Decimal, D::None},
        {"o_orderdate", K::Date, D::None}, {"o_orderpriority", K::DictString, D::Priority}, {"", K::DictString, D::Free},
        {"o_shippriority", K::Int64, D::None}, {"o_comment", K::DictString, D::Free}}},
      {TableId::Lineitem,
       {{"l_orderkey", K::Int64, D::None}, {"l_partkey", K::Int64, D::None}, {"l_suppkey", K::Int64, D::None},
        {"l_linenumber", K::Int64, D::None}, {"l_quantity", K::Int64, D::None},
        {"l_extendedprice", K::Decimal, D::None}, {"l_discount", K::Decimal, D::None}, {"l_tax", K::Decimal, D::None},
        {"l_returnflag", K::DictString, D::ReturnFlag}, {"l_linestatus", K::DictString, D::LineStatus},
        {"l_shipdate", K::Date, D::None}, {"l_commitdate", K::Date, D::None}, {"l_receiptdate", K::Date, D::None},
        {"", K::DictString, D::Free}, {"", K::DictString, D::Free}, {"", K::DictString, D::Free}}},
  };
  return layouts.at(t);
}

namespace detail {

inline std::int64_t parse_int(std::string_view s, std::size_t line, std::string_view field) {
  std::int64_t v = 0;
  bool neg = !s.empty() && s[0] == '-';
  if (neg) s.remove_prefix(1);
  if (s.empty()) throw ParseError(line, std::string(field) + ": expected integer");
  for (char c : s) {
    if (c < '0' || c > '9') throw ParseError(line, std::string(field) + ": expected integer, got '" + std::string(s) + "'");
    v = v * 10 + (c - '0');
  }
  return neg ? -v : v;
}

/// "12.34" -> 1234. Up to two fractional digits.
inline std::int64_t parse_cents(std::string_view s, std::size_t line, std::string_view field) {
  bool neg = !s.empty() && s[0] == '-';
  if (neg) s.remove_prefix(1);
  auto dot = s.find('.');
  auto whole = s.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  if (frac.size() > 2) throw ParseError(line, std::string(field) + ": more than two decimals");
  std::int64_t v = parse_int(whole, line, field) * 100;
  if (!frac.empty()) v += parse_int(frac, line, field) * (frac.size() == 1 ? 10 : 1);
  return neg ? -v : v;
}

inline std::string format_cents(std::int64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%lld.%02lld", v < 0 ? "-" : "", static_cast<long long>(std::llabs(v) / 100),
                static_cast<long long>(std::llabs(v) % 100));
  return buf;
}

inline std::vector<std::string_view> split_fields(std::string_view line, std::size_t lineno) {
  std::vector<std::string_view> out;
  if (line.empty() || line.back() != '|') throw ParseError(lineno, "missing trailing '|'");
  line.remove_suffix(1);
  std::size_t start = 0;
  while (true) {
    auto bar = line.find('|', start);
    out.push_back(line.substr(start, bar == std::string_view::npos ? std::string_view::npos : bar - start));
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return out;
}

}  // namespace detail

/// Parses a dbgen .tbl stream and keeps this node's range partition.
/// Lineitem and partsupp are split at order/part boundaries so they stay co-partitioned.
inline ColumnTable load_tbl(std::istream& in, TableId t, int P, int rank) {
  if (P < 1 || rank < 0 || rank >= P) throw InvalidArgument("load_tbl: bad P/rank");
  const auto& spec = tbl_layout(t);
  std::vector<std::vector<std::string_view>> rows;
  std::vector<std::string> lines;
  {
    std::string l;
    while (std::getline(in, l)) {
      if (!l.empty() && l.back() == '\r') l.pop_back();
      lines.push_back(std::move(l));
    }
  }
  rows.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto f = detail::split_fields(lines[i], i + 1);
    if (f.size() != spec.size())
      throw ParseError(i + 1, std::string(table_name(t)) + ": expected " + std::to_string(spec.size()) +
                                  " fields, got " + std::to_string(f.size()));
    rows.push_back(std::move(f));
  }

  // Partition: fixed-size tables replicate, child tables split at parent-key boundaries.
  std::int64_t total = static_cast<std::int64_t>(rows.size());
  RowRange mine{0, total};
  bool repl = is_replicated(t);
  if (!repl) {
    if (t == TableId::Lineitem || t == TableId::PartSupp) {
      std::vector<std::int64_t> group_start;
      for (std::size_t i = 0; i < rows.size(); ++i)
        if (i == 0 || rows[i][0] != rows[i - 1][0]) group_start.push_back(static_cast<std::int64_t>(i));
      auto groups = range_partition(static_cast<std::int64_t>(group_start.size()), P)[static_cast<std::size_t>(rank)];
      auto at = [&](std::int64_t g) {
        return g < static_cast<std::int64_t>(group_start.size()) ? group_start[static_cast<std::size_t>(g)] : total;
      };
      mine = {at(groups.first), at(groups.end()) - at(groups.first)};
    } else {
      mine = range_partition(total, P)[static_cast<std::size_t>(rank)];
    }
  }
  PartitionInfo info{total, rank, P, repl ? 0 : mine.first, repl ? total : mine.count, repl};
  ColumnTable out(std::string(table_name(t)), info);
  std::size_t line_of_first = 0;
  for (std::size_t i = 0, seen = 0; i < lines.size(); ++i)
    if (!lines[i].empty() && static_cast<std::int64_t>(seen++) == info.first_global_row) {
      line_of_first = i;
      break;
    }

  for (std::size_t c = 0; c < spec.size(); ++c) {
    const auto& fs = spec[c];
    if (fs.name.empty()) continue;
    std::vector<std::int64_t> vals;
    vals.reserve(static_cast<std::size_t>(info.row_count));
    detail::TextColumn text;
    std::unordered_map<std::string_view, std::int64_t> lookup;
    if (fs.domain != Domain::None && fs.domain != Domain::Free) {
      const auto& d = *domain_dict(fs.domain);
      for (std::size_t k = 0; k < d.size(); ++k) lookup.emplace(d[k], static_cast<std::int64_t>(k));
    }
    std::size_t lineno = line_of_first;
    for (std::int64_t r = info.first_global_row; r < info.first_global_row + info.row_count; ++r) {
      while (lines[lineno].empty()) ++lineno;
      auto v = rows[static_cast<std::size_t>(r)][c];
      ++lineno;
      switch (fs.kind) {
        case ColumnKind::Int64: vals.push_back(detail::parse_int(v, lineno, fs.name)); break;
        case ColumnKind::Decimal: vals.push_back(detail::parse_cents(v, lineno, fs.name)); break;
        case ColumnKind::Date:
          try {
            vals.push_back(date::parse(v));
          } catch (const InvalidArgument& e) {
            throw ParseError(lineno, std::string(fs.name) + ": " + e.what());
          }
          break;
        case ColumnKind::DictString:
          if (fs.domain == Domain::Free) {
            text.push(std::string(v));
          } else {
            auto it = lookup.find(v);
            if (it == lookup.end()) throw ParseError(lineno, std::string(fs.name) + ": unknown value '" + std::string(v) + "'");
            vals.push_back(it->second);
          }
          break;
      }
    }
    if (fs.kind == ColumnKind::DictString)
      out.add_column(std::string(fs.name), fs.domain == Domain::Free ? text.finish()
                                                                   : Column::strings(std::move(vals), domain_dict(fs.domain)));
    else
      out.add_column(std::string(fs.name), Column{fs.kind, std::move(vals), nullptr});
  }
  return out;
}

inline ColumnTable load_tbl(const std::string& path, TableId t, int P, int rank) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  return load_tbl(in, t, P, rank);
}

/// Writes the table in dbgen layout; columns that are not modeled are written empty.
inline void write_tbl(std::ostream& out, const ColumnTable& table) {
  auto t = parse_table(table.name());
  const auto& spec = tbl_layout(t);
  std::vector<const Column*> cols;
  for (const auto& fs : spec) cols.push_back(fs.name.empty() ? nullptr : &table.col(fs.name));
  std::string line;
  for (std::int64_t r = 0; r < table.row_count(); ++r) {
    line.clear();
    for (const auto* c : cols) {
      if (c != nullptr) {
        auto i = static_cast<std::size_t>(r);
        switch (c->kind) {
          case ColumnKind::Int64: line += std::to_string(c->values[i]); break;
          case ColumnKind::Decimal: line += detail::format_cents(c->values[i]); break;
          case ColumnKind::Date: line += date::format(c->values[i]); break;
          case ColumnKind::DictString: line += c->str(i); break;
        }
      }
      line += '|';
    }
    line += '\n';
    out << line;
  }
}

// ---------------------------------------------------------------------------
// database

/// One node's view of the TPC-H database plus join indexes along the schema's foreign keys.
struct Database {
  double sf = 0;
  int P = 1;
  int rank = 0;
  std::uint64_t seed = kDefaultSeed;

  ColumnTable region, nation, supplier, customer, part, partsupp, orders, lineitem;
  std::map<TableId, PartitionLayout> layouts;

  // child -> parent join indexes
  JoinIndex lineitem_orders, lineitem_part, lineitem_supplier, partsupp_part, partsupp_supplier, orders_customer,
      customer_nation, supplier_nation, nation_region;

  std::vector<std::int64_t> order_lines;    // local lineitems of local order o: [order_lines[o], order_lines[o+1])
  std::vector<std::int64_t> part_supplies;  // local partsupp rows of local part p

  /// Columns replicated in full on every node, keyed "table.column", indexed by global row.
  std::map<std::string, std::vector<std::int64_t>, std::less<>> replicated;

  const ColumnTable& table(TableId t) const {
    switch (t) {
      case TableId::Region: return region;
      case TableId::Nation: return nation;
      case TableId::Supplier: return supplier;
      case TableId::Customer: return customer;
      case TableId::Part: return part;
      case TableId::PartSupp: return partsupp;
      case TableId::Orders: return orders;
      case TableId::Lineitem: return lineitem;
    }
    throw InvalidArgument("unknown table");
  }

  const PartitionLayout& layout(TableId t) const { return layouts.at(t); }

  const std::vector<std::int64_t>* replicated_column(std::string_view key) const {
    auto it = replicated.find(key);
    return it == replicated.end() ? nullptr : &it->second;
  }
};

/// Builds join indexes and one-to-many offsets once all tables are in place.
inline void index_database(Database& db) {
  auto key_map = [](const ColumnTable& parent, std::string_view key_col) -> KeyToRow {
    const auto& keys = parent.col(key_col);
    bool dense = true;
    for (std::size_t i = 0; i < keys.size() && dense; ++i)
      dense = keys[i] == parent.partition().first_global_row + static_cast<std::int64_t>(i) + 1;
    if (dense) return dense_key_to_row;
    auto m = std::make_shared<std::unordered_map<std::int64_t, std::int64_t>>();
    for (std::size_t i = 0; i < keys.size(); ++i)
      m->emplace(keys[i], parent.partition().first_global_row + static_cast<std::int64_t>(i));
    return [m](std::int64_t k) {
      auto it = m->find(k);
      return it == m->end() ? std::int64_t{-1} : it->second;
    };
  };
  auto zero_based = [](std::int64_t k) { return k; };
  db.lineitem_orders = build_join_index(db.lineitem, "l_orderkey", "orders", db.orders.partition(),
                                        key_map(db.orders, "o_orderkey"));
  db.lineitem_part = build_join_index(db.lineitem, "l_partkey", "part", db.layout(TableId::Part).info(db.rank));
  db.lineitem_supplier = build_join_index(db.lineitem, "l_suppkey", "supplier", db.layout(TableId::Supplier).info(db.rank));
  db.partsupp_part = build_join_index(db.partsupp, "ps_partkey", "part", db.part.partition());
  db.partsupp_supplier =
      build_join_index(db.partsupp, "ps_suppkey", "supplier", db.layout(TableId::Supplier).info(db.rank));
  db.orders_customer = build_join_index(db.orders, "o_custkey", "customer", db.layout(TableId::Customer).info(db.rank));
  db.customer_nation = build_join_index(db.customer, "c_nationkey", "nation", db.nation.partition(), zero_based);
  db.supplier_nation = build_join_index(db.supplier, "s_nationkey", "nation", db.nation.partition(), zero_based);
  db.nation_region = build_join_index(db.nation, "n_regionkey", "region", db.region.partition(), zero_based);
  db.order_lines = build_child_offsets(db.lineitem_orders, db.orders.partition());
  db.part_supplies = build_child_offsets(db.partsupp_part, db.part.partition());
}

inline Database generate_database(const GenConfig& cfg) {
  check_config(cfg);
  Database db;
  db.sf = cfg.sf;
  db.P = cfg.P;
  db.rank = cfg.rank;
  db.seed = cfg.seed;
  for (auto t : kAllTables) db.layouts.emplace(t, table_layout(cfg, t));
  db.region = generate_chunk(cfg, TableId::Region);
  db.nation = generate_chunk(cfg, TableId::Nation);
  db.supplier = generate_chunk(cfg, TableId::Supplier);
  db.customer = generate_chunk(cfg, TableId::Customer);
  db.part = generate_chunk(cfg, TableId::Part);
  db.partsupp = generate_chunk(cfg, TableId::PartSupp);
  db.orders = generate_chunk(cfg, TableId::Orders);
  db.lineitem = generate_chunk(cfg, TableId::Lineitem);
  index_database(db);
  return db;
}

/// Loads <dir>/<table>.tbl for all eight tables. Layouts are derived from the files.
inline Database load_database(const std::string& dir, int P, int rank) {
  Database db;
  db.P = P;
  db.rank = rank;
  for (auto t : kAllTables) {
    std::vector<RowRange> ranges;
    ColumnTable mine;
    for (int r = 0; r < P; ++r) {
      auto part = load_tbl(dir + "/" + std::string(table_name(t)) + ".tbl", t, P, r);
      ranges.push_back(is_replicated(t) ? RowRange{r == 0 ? 0 : part.row_count(), r == 0 ? part.row_count() : 0}
                                        : RowRange{part.partition().first_global_row, part.row_count()});
      if (r == rank) mine = std::move(part);
    }
    db.layouts.emplace(t, PartitionLayout(std::move(ranges)));
    switch (t) {
      case TableId::Region: db.region = std::move(mine); break;
      case TableId::Nation: db.nation = std::move(mine); break;
      case TableId::Supplier: db.supplier = std::move(mine); break;
      case TableId::Customer: db.customer = std::move(mine); break;
      case TableId::Part: db.part = std::move(mine); break;
      case TableId::PartSupp: db.partsupp = std::move(mine); break;
      case TableId::Orders: db.orders = std::move(mine); break;
      case TableId::Lineitem: db.lineitem = std::move(mine); break;
    }
  }
  db.sf = static_cast<double>(db.layout(TableId::Supplier).total_rows()) / 10000.0;
  index_database(db);
  return db;
}

}  // namespace olapnet::tpch
