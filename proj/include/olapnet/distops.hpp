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
 * @file distops.hpp
 * @brief Distributed building blocks: remote filters, top-k selection,
 *        approximate distributed sums and late materialization.
 *
 * Keys handled here are global row ids of the remote table. Callers map
 * TPC-H keys to rows (key - 1) before calling in.
 */

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "olapnet/cluster.hpp"
#include "olapnet/codec.hpp"
#include "olapnet/error.hpp"
#include "olapnet/storage.hpp"
#include "olapnet/wire.hpp"

namespace olapnet::dist {

using codec::Bitset;

// ---------------------------------------------------------------------------
// typed reductions

inline Bytes encode_i64s(std::span<const std::int64_t> v) {
  ByteWriter w;
  w.put_varint(v.size());
  for (auto x : v) w.put_i64(x);
  return w.take();
}

inline std::vector<std::int64_t> decode_i64s(std::span<const std::uint8_t> b) {
  ByteReader r(b);
  auto n = r.get_varint();
  if (n > r.remaining() / 8) throw DecodeError("i64 vector longer than payload");
  std::vector<std::int64_t> v(n);
  for (auto& x : v) x = r.get_i64();
  return v;
}

/// Element-wise sum of equally long int64 vectors.
inline ReduceOperator sum_i64_op() {
  return {"sum_i64",
          [](const Bytes& a, const Bytes& b) {
            auto x = decode_i64s(a);
            auto y = decode_i64s(b);
            if (x.size() != y.size()) throw ProtocolError("sum_i64: vector lengths differ");
            for (std::size_t i = 0; i < x.size(); ++i) x[i] += y[i];
            return encode_i64s(x);
          },
          std::nullopt};
}

inline std::vector<std::int64_t> allreduce_sum(ClusterCtx& ctx, std::span<const std::int64_t> v) {
  return decode_i64s(ctx.allreduce(encode_i64s(v), sum_i64_op()));
}

/// Sum at root; other nodes get an empty vector.
inline std::vector<std::int64_t> reduce_sum(ClusterCtx& ctx, std::span<const std::int64_t> v, int root = 0) {
  auto r = ctx.reduce(encode_i64s(v), sum_i64_op(), root);
  return r ? decode_i64s(*r) : std::vector<std::int64_t>{};
}

inline bool allreduce_any(ClusterCtx& ctx, bool flag) {
  std::int64_t f = flag ? 1 : 0;
  return allreduce_sum(ctx, std::span<const std::int64_t>(&f, 1))[0] != 0;
}

// ---------------------------------------------------------------------------
// key routing

/// Sorted, deduplicated rows grouped by owning node.
inline std::vector<std::vector<std::uint64_t>> group_by_owner(std::span<const std::int64_t> rows,
                                                              const PartitionLayout& layout) {
  std::vector<std::vector<std::uint64_t>> out(static_cast<std::size_t>(layout.nodes()));
  for (auto r : rows) out[static_cast<std::size_t>(layout.owner(r))].push_back(static_cast<std::uint64_t>(r));
  for (auto& v : out) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return out;
}

namespace detail {

inline std::vector<std::uint64_t> decode_owned_keys(std::span<const std::uint8_t> payload, const RowRange& mine,
                                                    int rank, int src) {
  ByteReader r(payload);
  auto keys = codec::read_delta_varint(r);
  for (auto k : keys)
    if (static_cast<std::int64_t>(k) < mine.first || static_cast<std::int64_t>(k) >= mine.end())
      throw ProtocolError("node " + std::to_string(rank) + " asked by node " + std::to_string(src) + " for row " +
                          std::to_string(k) + " outside its partition [" + std::to_string(mine.first) + ", " +
                          std::to_string(mine.end()) + ")");
  return keys;
}

inline std::vector<Bytes> encode_requests(const std::vector<std::vector<std::uint64_t>>& keys_per_owner, int P) {
  if (static_cast<int>(keys_per_owner.size()) != P)
    throw InvalidArgument("need one key list per node, got " + std::to_string(keys_per_owner.size()));
  std::vector<Bytes> req;
  req.reserve(static_cast<std::size_t>(P));
  for (const auto& keys : keys_per_owner) req.push_back(codec::delta_varint_encode(keys).bytes);
  return req;
}

}  // namespace detail

/// Answers of one remote filter round: bits[o] holds one bit per key requested from owner o.
struct FilterAnswer {
  std::vector<std::vector<std::uint64_t>> keys;
  std::vector<Bitset> bits;

  /// Looks up the answer for a row that was requested from its owner.
  bool passes(std::int64_t row, int owner) const {
    const auto& k = keys[static_cast<std::size_t>(owner)];
    auto it = std::lower_bound(k.begin(), k.end(), static_cast<std::uint64_t>(row));
    if (it == k.end() || *it != static_cast<std::uint64_t>(row))
      throw InvalidArgument("row " + std::to_string(row) + " was not requested");
    return bits[static_cast<std::size_t>(owner)].test(static_cast<std::size_t>(it - k.begin()));
  }

  std::size_t requested() const {
    std::size_t n = 0;
    for (const auto& k : keys) n += k.size();
    return n;
  }
};

/// Request-response filter: keys go to their owners, owners answer with one bit per key.
inline FilterAnswer remote_filter_request(ClusterCtx& ctx, std::vector<std::vector<std::uint64_t>> keys_per_owner,
                                          const PartitionLayout& layout,
                                          const std::function<bool(std::int64_t)>& predicate) {
  auto incoming = ctx.all_to_all_1factor(detail::encode_requests(keys_per_owner, ctx.size()));
  const auto& mine = layout.range(ctx.rank());
  std::vector<Bytes> replies;
  for (int src = 0; src < ctx.size(); ++src) {
    auto keys = detail::decode_owned_keys(incoming[static_cast<std::size_t>(src)], mine, ctx.rank(), src);
    Bitset b(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i)
      if (predicate(static_cast<std::int64_t>(keys[i]))) b.set(i);
    ctx.add_scanned(keys.size());
    replies.push_back(codec::bitset_encode(b));
  }
  auto answers = ctx.all_to_all_1factor(std::move(replies));
  FilterAnswer out{std::move(keys_per_owner), {}};
  for (int o = 0; o < ctx.size(); ++o) {
    auto b = codec::bitset_decode(answers[static_cast<std::size_t>(o)]);
    if (b.size() != out.keys[static_cast<std::size_t>(o)].size())
      throw ProtocolError("node " + std::to_string(o) + " answered " + std::to_string(b.size()) + " bits for " +
                          std::to_string(out.keys[static_cast<std::size_t>(o)].size()) + " keys");
    out.bits.push_back(std::move(b));
  }
  return out;
}

/// Request-response fetch of one integer attribute per requested row.
struct AttributeAnswer {
  std::vector<std::vector<std::uint64_t>> keys;
  std::vector<std::vector<std::int64_t>> values;

  std::int64_t value(std::int64_t row, int owner) const {
    const auto& k = keys[static_cast<std::size_t>(owner)];
    auto it = std::lower_bound(k.begin(), k.end(), static_cast<std::uint64_t>(row));
    if (it == k.end() || *it != static_cast<std::uint64_t>(row))
      throw InvalidArgument("row " + std::to_string(row) + " was not requested");
    return values[static_cast<std::size_t>(owner)][static_cast<std::size_t>(it - k.begin())];
  }
};

inline AttributeAnswer remote_attribute_request(ClusterCtx& ctx, std::vector<std::vector<std::uint64_t>> keys_per_owner,
                                                const PartitionLayout& layout,
                                                const std::function<std::int64_t(std::int64_t)>& attribute) {
  auto incoming = ctx.all_to_all_1factor(detail::encode_requests(keys_per_owner, ctx.size()));
  const auto& mine = layout.range(ctx.rank());
  std::vector<Bytes> replies;
  for (int src = 0; src < ctx.size(); ++src) {
    auto keys = detail::decode_owned_keys(incoming[static_cast<std::size_t>(src)], mine, ctx.rank(), src);
    ByteWriter w;
    for (auto k : keys) w.put_svarint(attribute(static_cast<std::int64_t>(k)));
    ctx.add_scanned(keys.size());
    replies.push_back(w.take());
  }
  auto answers = ctx.all_to_all_1factor(std::move(replies));
  AttributeAnswer out{std::move(keys_per_owner), {}};
  for (int o = 0; o < ctx.size(); ++o) {
    ByteReader r(answers[static_cast<std::size_t>(o)]);
    std::vector<std::int64_t> v(out.keys[static_cast<std::size_t>(o)].size());
    for (auto& x : v) x = r.get_svarint();
    if (!r.empty()) throw ProtocolError("attribute reply from node " + std::to_string(o) + " has trailing bytes");
    out.values.push_back(std::move(v));
  }
  return out;
}

/// Replicates the filter result over the whole remote table: each node
/// contributes the bitset over its own partition, concatenated in node order.
/// Encoded bitsets go through the cluster's byte compressor.
inline Bitset remote_filter_replicate(ClusterCtx& ctx, const Bitset& local) {
  auto parts = ctx.allgather(codec::frame_bytes(ctx.compressor(), codec::bitset_encode(local)));
  Bitset global;
  for (const auto& p : parts) global.append(codec::bitset_decode(codec::unframe_bytes(ctx.compressor(), p)));
  return global;
}

inline Bitset remote_filter_replicate(ClusterCtx& ctx, const ColumnTable& remote,
                                      const std::function<bool(std::size_t local_row)>& predicate) {
  Bitset local(static_cast<std::size_t>(remote.row_count()));
  for (std::size_t i = 0; i < local.size(); ++i)
    if (predicate(i)) local.set(i);
  ctx.add_scanned(local.size());
  return remote_filter_replicate(ctx, local);
}

// ---------------------------------------------------------------------------
// filter cost model

struct FilterCostInputs {
  double n = 0;        // requested keys after local filtering, global
  double m_table = 1;  // remote table rows, global
  int P = 1;
  double gamma = 0;    // fraction of remote rows passing the remote filter
};

enum class FilterChoice : std::uint8_t { RequestResponse, Replicate };

struct FilterCostEstimate {
  std::optional<double> alt1_bits;  // empty when n / P >= m_table
  double alt2_bits = 0;
  FilterChoice choice = FilterChoice::RequestResponse;
};

inline FilterCostEstimate estimate_filter_bits(const FilterCostInputs& c) {
  if (!(c.n >= 0) || !(c.m_table >= 1) || c.P < 1 || !(c.gamma >= 0 && c.gamma <= 1))
    throw InvalidArgument("filter cost inputs out of range");
  FilterCostEstimate e;
  double per_node = c.n / c.P;
  if (per_node < c.m_table) e.alt1_bits = per_node == 0 ? 0.0 : per_node * std::log2(c.m_table * c.P / c.n);
  e.alt2_bits = (c.gamma == 0 || c.gamma == 1) ? 0.0 : c.gamma * c.m_table * std::log2(1 / c.gamma);
  e.choice = e.alt1_bits && *e.alt1_bits <= e.alt2_bits ? FilterChoice::RequestResponse : FilterChoice::Replicate;
  return e;
}

// ---------------------------------------------------------------------------
// top-k

/// Generic bounded merge of two lists sorted by before.
template <class Row, class Before>
std::vector<Row> merge_topk(const std::vector<Row>& a, const std::vector<Row>& b, std::size_t k, Before before) {
  std::vector<Row> out;
  out.reserve(std::min(k, a.size() + b.size()));
  std::size_t i = 0, j = 0;
  while (out.size() < k && (i < a.size() || j < b.size())) {
    if (j == b.size() || (i < a.size() && !before(b[j], a[i])))
      out.push_back(a[i++]);
    else
      out.push_back(b[j++]);
  }
  return out;
}

/// Sorts rows by before and keeps the first k.
template <class Row, class Before>
void local_topk(std::vector<Row>& rows, std::size_t k, Before before) {
  if (rows.size() > k) {
    std::partial_sort(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(k), rows.end(), before);
    rows.resize(k);
  } else {
    std::sort(rows.begin(), rows.end(), before);
  }
}

/// Row types provide void put(ByteWriter&) const and static Row get(ByteReader&).
template <class Row>
Bytes encode_rows(const std::vector<Row>& rows) {
  ByteWriter w;
  w.put_varint(rows.size());
  for (const auto& r : rows) r.put(w);
  return w.take();
}

template <class Row>
std::vector<Row> decode_rows(std::span<const std::uint8_t> b) {
  ByteReader r(b);
  auto n = r.get_varint();
  if (n > r.remaining()) throw DecodeError("row count exceeds payload");
  std::vector<Row> out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) out.push_back(Row::get(r));
  if (!r.empty()) throw DecodeError("trailing bytes after rows");
  return out;
}

template <class Row, class Before>
ReduceOperator topk_rows_op(const std::string& name, std::size_t k, Before before) {
  return {name + "/k=" + std::to_string(k),
          [k, before](const Bytes& a, const Bytes& b) {
            return encode_rows(merge_topk(decode_rows<Row>(a), decode_rows<Row>(b), k, before));
          },
          std::nullopt};
}

/// Top-k of the union of every node's locally sorted list, at root.
template <class Row, class Before>
std::vector<Row> global_topk_rows(ClusterCtx& ctx, std::vector<Row> local, std::size_t k, Before before,
                                  const std::string& name, int root = 0) {
  local_topk(local, k, before);
  auto r = ctx.reduce(encode_rows(local), topk_rows_op<Row>(name, k, before), root);
  return r ? decode_rows<Row>(*r) : std::vector<Row>{};
}

template <class Row, class Before>
std::vector<Row> allreduce_topk_rows(ClusterCtx& ctx, std::vector<Row> local, std::size_t k, Before before,
                                     const std::string& name) {
  local_topk(local, k, before);
  return decode_rows<Row>(ctx.allreduce(encode_rows(local), topk_rows_op<Row>(name, k, before)));
}

struct TopKEntry {
  std::int64_t key = 0;
  std::int64_t value = 0;
  std::optional<Bytes> payload;

  void put(ByteWriter& w) const {
    w.put_svarint(key);
    w.put_svarint(value);
    w.put_u8(payload ? 1 : 0);
    if (payload) w.put_blob(*payload);
  }
  static TopKEntry get(ByteReader& r) {
    TopKEntry e;
    e.key = r.get_svarint();
    e.value = r.get_svarint();
    if (r.get_u8() != 0) e.payload = r.get_blob();
    return e;
  }
  friend bool operator==(const TopKEntry&, const TopKEntry&) = default;
};

/// value descending, then key ascending
inline bool topk_before(const TopKEntry& a, const TopKEntry& b) {
  return a.value != b.value ? a.value > b.value : a.key < b.key;
}

struct TopKList {
  std::size_t k = 0;
  std::vector<TopKEntry> entries;

  /// Builds a valid list from unsorted entries.
  static TopKList from(std::vector<TopKEntry> e, std::size_t k) {
    local_topk(e, k, topk_before);
    return {k, std::move(e)};
  }

  bool valid() const {
    if (entries.size() > k) return false;
    for (std::size_t i = 1; i < entries.size(); ++i)
      if (!topk_before(entries[i - 1], entries[i])) return false;
    return true;
  }
  friend bool operator==(const TopKList&, const TopKList&) = default;
};

inline ReduceOperator topk_merge_op(std::size_t k) { return topk_rows_op<TopKEntry>("topk", k, topk_before); }

/// Top-k of the union at root. Nodes passing different k fail the collective.
inline TopKList global_topk(ClusterCtx& ctx, const TopKList& local, std::size_t k, int root = 0) {
  if (!local.valid() || local.k != k) throw InvalidArgument("global_topk: local list is not a valid top-k list");
  auto r = ctx.reduce(encode_rows(local.entries), topk_merge_op(k), root);
  return {k, r ? decode_rows<TopKEntry>(*r) : std::vector<TopKEntry>{}};
}

// ---------------------------------------------------------------------------
// lazy remote filtering of top-k candidates

struct LazyOptions {
  std::size_t k = 10;
  std::size_t chunk_size = 0;   // 0: max(k, 64)
  int threshold_every = 0;      // rounds between global k-th value checks; 0 disables
};

template <class T>
struct LazyResult {
  std::vector<T> survivors;      // at most k, in candidate order
  std::uint64_t keys_requested = 0;
  int rounds = 0;
};

/// Filters candidates (sorted best first) through a remote predicate chunk by
/// chunk until k local survivors exist or candidates run out. Collective: all
/// nodes keep calling rounds until every node is done.
template <class T, class RowOf, class ValueOf>
LazyResult<T> lazy_topk_filter(ClusterCtx& ctx, std::span<const T> candidates, RowOf filter_row, ValueOf value_of,
                               const PartitionLayout& remote_layout,
                               const std::function<bool(std::int64_t)>& predicate, LazyOptions opt) {
  if (opt.k == 0) throw InvalidArgument("lazy_topk_filter: k must be >= 1");
  const std::size_t chunk = opt.chunk_size == 0 ? std::max<std::size_t>(opt.k, 64) : opt.chunk_size;
  LazyResult<T> out;
  std::size_t next = 0;
  std::optional<std::int64_t> threshold;
  auto active = [&] {
    if (out.survivors.size() >= opt.k || next >= candidates.size()) return false;
    return !(threshold && value_of(candidates[next]) < *threshold);
  };
  while (allreduce_any(ctx, active())) {
    std::size_t begin = next, end = next;
    std::vector<std::int64_t> rows;
    if (active()) {
      end = std::min(candidates.size(), next + chunk);
      for (std::size_t i = begin; i < end; ++i) rows.push_back(filter_row(candidates[i]));
      next = end;
    }
    auto grouped = group_by_owner(rows, remote_layout);
    auto answer = remote_filter_request(ctx, std::move(grouped), remote_layout, predicate);
    out.keys_requested += answer.requested();
    ++out.rounds;
    for (std::size_t i = begin; i < end && out.survivors.size() < opt.k; ++i) {
      auto row = filter_row(candidates[i]);
      if (answer.passes(row, remote_layout.owner(row))) out.survivors.push_back(candidates[i]);
    }
    if (opt.threshold_every > 0 && out.rounds % opt.threshold_every == 0) {
      std::vector<std::int64_t> mine;
      for (const auto& s : out.survivors) mine.push_back(value_of(s));
      struct V {
        std::int64_t v;
        void put(ByteWriter& w) const { w.put_i64(v); }
        static V get(ByteReader& r) { return {r.get_i64()}; }
      };
      std::vector<V> vs;
      for (auto v : mine) vs.push_back({v});
      auto best = allreduce_topk_rows(ctx, std::move(vs), opt.k, [](const V& a, const V& b) { return a.v > b.v; },
                                      "lazy_threshold");
      if (best.size() >= opt.k) threshold = best.back().v;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// m-bit approximation of partial sums

struct EncodedGroup {
  int offset = -1;                    // highest one-bit position of the group max
  std::vector<std::uint64_t> codes;
};

struct EncodedPartialSums {
  int m_bits = 8;
  std::size_t group_size = 1024;
  std::vector<EncodedGroup> groups;

  std::size_t count() const {
    std::size_t n = 0;
    for (const auto& g : groups) n += g.codes.size();
    return n;
  }

  int shift(const EncodedGroup& g) const { return std::max(0, g.offset - m_bits + 1); }

  std::uint64_t lower(std::size_t i) const {
    const auto& g = groups[i / group_size];
    return g.codes[i % group_size] << shift(g);
  }

  std::uint64_t upper(std::size_t i) const {
    const auto& g = groups[i / group_size];
    int s = shift(g);
    return (g.codes[i % group_size] << s) + ((std::uint64_t{1} << s) - 1);
  }

  /// Bytes of packed codes only, without offsets or header.
  std::size_t code_bytes() const {
    std::size_t n = 0;
    for (const auto& g : groups) n += (g.codes.size() * static_cast<std::size_t>(m_bits) + 7) / 8;
    return n;
  }

  /// [group_size u32][m_bits u8][per group: offset i16, codes packed LSB first, padded to a byte]
  Bytes serialize() const {
    ByteWriter w;
    w.put_u32(static_cast<std::uint32_t>(group_size));
    w.put_u8(static_cast<std::uint8_t>(m_bits));
    for (const auto& g : groups) {
      w.put_i16(static_cast<std::int16_t>(g.offset));
      std::uint64_t acc = 0;
      int fill = 0;
      for (auto c : g.codes) {
        for (int b = 0; b < m_bits; ++b) {
          acc |= ((c >> b) & 1u) << fill;
          if (++fill == 8) {
            w.put_u8(static_cast<std::uint8_t>(acc));
            acc = 0;
            fill = 0;
          }
        }
      }
      if (fill > 0) w.put_u8(static_cast<std::uint8_t>(acc));
    }
    return w.take();
  }

  /// The receiver knows how many values to expect from its key range.
  static EncodedPartialSums deserialize(std::span<const std::uint8_t> data, std::size_t count) {
    ByteReader r(data);
    EncodedPartialSums e;
    e.group_size = r.get_u32();
    e.m_bits = r.get_u8();
    if (e.group_size == 0 || e.m_bits < 1 || e.m_bits > 64) throw DecodeError("bad encoded-sums header");
    for (std::size_t first = 0; first < count; first += e.group_size) {
      EncodedGroup g;
      g.offset = r.get_i16();
      std::size_t n = std::min(e.group_size, count - first);
      auto packed = r.get_bytes((n * static_cast<std::size_t>(e.m_bits) + 7) / 8);
      std::size_t bit = 0;
      g.codes.resize(n);
      for (auto& c : g.codes)
        for (int b = 0; b < e.m_bits; ++b, ++bit) c |= static_cast<std::uint64_t>((packed[bit / 8] >> (bit % 8)) & 1u) << b;
      e.groups.push_back(std::move(g));
    }
    if (!r.empty()) throw DecodeError("trailing bytes after encoded sums");
    return e;
  }
};

inline int highest_bit(std::uint64_t v) { return v == 0 ? -1 : 63 - std::countl_zero(v); }

inline EncodedPartialSums encode_partial_sums(std::span<const std::uint64_t> values, int m_bits = 8,
                                              std::size_t group_size = 1024) {
  if (m_bits < 1 || m_bits > 64) throw InvalidArgument("m_bits must be in [1, 64]");
  if (group_size == 0) throw InvalidArgument("group_size must be >= 1");
  EncodedPartialSums e{m_bits, group_size, {}};
  for (std::size_t first = 0; first < values.size(); first += group_size) {
    auto g = values.subspan(first, std::min(group_size, values.size() - first));
    EncodedGroup eg;
    eg.offset = highest_bit(*std::max_element(g.begin(), g.end()));
    int s = std::max(0, eg.offset - m_bits + 1);
    eg.codes.reserve(g.size());
    for (auto v : g) eg.codes.push_back(v >> s);
    e.groups.push_back(std::move(eg));
  }
  return e;
}

inline EncodedPartialSums encode_partial_sums(std::span<const std::int64_t> values, int m_bits = 8,
                                              std::size_t group_size = 1024) {
  std::vector<std::uint64_t> u;
  u.reserve(values.size());
  for (auto v : values) {
    if (v < 0) throw InvalidArgument("partial sums must be non-negative");
    u.push_back(static_cast<std::uint64_t>(v));
  }
  return encode_partial_sums(std::span<const std::uint64_t>(u), m_bits, group_size);
}

// ---------------------------------------------------------------------------
// distributed top-k by sum

/// Dense partial sums over keys [0, owners.total_rows()), identical key space on every node.
struct Aggregation {
  std::vector<std::uint64_t> partial;
  PartitionLayout owners;
};

struct SumVolume {
  std::uint64_t phase1_bytes = 0;        // cross-node payload of the partial-sum exchange
  std::uint64_t phase1_value_bytes = 0;  // same, counting only value/code bytes
  std::uint64_t phase5_bytes = 0;        // key requests plus exact replies
  std::uint64_t keys_owned = 0;
  std::uint64_t keys_pruned = 0;
  std::uint64_t keys_fetched = 0;
  std::uint64_t bound_width_sum = 0;     // sum of upper - lower over owned keys
  std::vector<std::int64_t> pruned;      // keys discarded by this node in phase 4
};

struct TopSumResult {
  TopKList top;  // at root
  SumVolume volume;
};

namespace detail {

inline void check_aggregation(const ClusterCtx& ctx, const Aggregation& agg) {
  if (agg.owners.nodes() != ctx.size()) throw InvalidArgument("aggregation layout has wrong node count");
  if (static_cast<std::int64_t>(agg.partial.size()) != agg.owners.total_rows())
    throw InvalidArgument("partial sums do not cover the key space");
}

inline TopKList owner_topk(const std::vector<std::uint64_t>& totals, const RowRange& mine, std::size_t k,
                           const std::vector<bool>* keep = nullptr) {
  std::vector<TopKEntry> e;
  for (std::size_t i = 0; i < totals.size(); ++i)
    if (keep == nullptr || (*keep)[i]) e.push_back({mine.first + static_cast<std::int64_t>(i), static_cast<std::int64_t>(totals[i]), {}});
  return TopKList::from(std::move(e), k);
}

}  // namespace detail

/// Exchanges full 64-bit partial sums for every key to its owner, then selects top-k.
inline TopSumResult naive_topk_sum(ClusterCtx& ctx, const Aggregation& agg, std::size_t k, bool use_1factor,
                                   int root = 0) {
  detail::check_aggregation(ctx, agg);
  TopSumResult res;
  const int P = ctx.size();
  std::vector<Bytes> out;
  for (int d = 0; d < P; ++d) {
    const auto& r = agg.owners.range(d);
    ByteWriter w;
    for (std::int64_t key = r.first; key < r.end(); ++key) w.put_u64(agg.partial[static_cast<std::size_t>(key)]);
    if (d != ctx.rank()) res.volume.phase1_value_bytes += w.size();
    out.push_back(w.take());
  }
  std::vector<Bytes> in;
  {
    auto g = ctx.phase("naive/phase1");
    in = use_1factor ? ctx.all_to_all_1factor(std::move(out)) : ctx.all_to_all_direct(std::move(out));
    res.volume.phase1_bytes = ctx.stats().per_collective.back().payload_bytes;
  }
  const auto& mine = agg.owners.range(ctx.rank());
  std::vector<std::uint64_t> totals(static_cast<std::size_t>(mine.count), 0);
  for (const auto& b : in) {
    ByteReader r(b);
    for (auto& t : totals) t += r.get_u64();
    if (!r.empty()) throw ProtocolError("naive exchange: payload does not match key range");
  }
  res.volume.keys_owned = totals.size();
  ctx.add_counter("naive/phase1_value_bytes", res.volume.phase1_value_bytes);
  auto g = ctx.phase("naive/select");
  res.top = global_topk(ctx, detail::owner_topk(totals, mine, k), k, root);
  return res;
}

/// Top-k by global sum with m-bit bounds, pruning, and exact fetch of survivors.
inline TopSumResult approx_topk_sum(ClusterCtx& ctx, const Aggregation& agg, std::size_t k, int m_bits = 8,
                                    std::size_t group_size = 1024, int root = 0) {
  detail::check_aggregation(ctx, agg);
  if (k == 0) throw InvalidArgument("approx_topk_sum: k must be >= 1");
  TopSumResult res;
  const int P = ctx.size();
  const auto& mine = agg.owners.range(ctx.rank());
  const auto n_mine = static_cast<std::size_t>(mine.count);

  // 1: encoded partial sums to key owners
  std::vector<Bytes> out;
  for (int d = 0; d < P; ++d) {
    const auto& r = agg.owners.range(d);
    auto e = encode_partial_sums(std::span<const std::uint64_t>(agg.partial).subspan(static_cast<std::size_t>(r.first),
                                                                                     static_cast<std::size_t>(r.count)),
                                 m_bits, group_size);
    if (d != ctx.rank()) res.volume.phase1_value_bytes += e.code_bytes();
    out.push_back(e.serialize());
  }
  std::vector<Bytes> in;
  {
    auto g = ctx.phase("approx/phase1");
    in = ctx.all_to_all_1factor(std::move(out));
    res.volume.phase1_bytes = ctx.stats().per_collective.back().payload_bytes;
  }

  // 2: bounds of the global sums of owned keys
  std::vector<std::uint64_t> lo(n_mine, 0), hi(n_mine, 0);
  for (const auto& b : in) {
    auto e = EncodedPartialSums::deserialize(b, n_mine);
    for (std::size_t i = 0; i < n_mine; ++i) {
      lo[i] += e.lower(i);
      hi[i] += e.upper(i);
    }
  }
  res.volume.keys_owned = n_mine;
  for (std::size_t i = 0; i < n_mine; ++i) res.volume.bound_width_sum += hi[i] - lo[i];

  // 3: global k-th highest lower bound
  std::uint64_t threshold = 0;
  {
    auto g = ctx.phase("approx/phase3");
    std::vector<TopKEntry> lows;
    for (std::size_t i = 0; i < n_mine; ++i)
      lows.push_back({mine.first + static_cast<std::int64_t>(i), static_cast<std::int64_t>(lo[i]), {}});
    auto best = allreduce_topk_rows(ctx, std::move(lows), k, topk_before, "topk");
    if (best.size() >= k) threshold = static_cast<std::uint64_t>(best.back().value);
  }

  // 4: prune; keys with exact bounds need no fetch
  std::vector<bool> keep(n_mine, false);
  std::vector<std::uint64_t> fetch;
  for (std::size_t i = 0; i < n_mine; ++i) {
    if (hi[i] < threshold) {
      res.volume.pruned.push_back(mine.first + static_cast<std::int64_t>(i));
      continue;
    }
    keep[i] = true;
    if (lo[i] != hi[i]) fetch.push_back(static_cast<std::uint64_t>(mine.first) + i);
  }
  res.volume.keys_pruned = res.volume.pruned.size();
  res.volume.keys_fetched = fetch.size();

  // 5: exact partial sums of surviving keys
  std::vector<std::uint64_t> totals = lo;
  {
    auto g = ctx.phase("approx/phase5");
    auto req = codec::delta_varint_encode(fetch).bytes;
    std::vector<Bytes> reqs(static_cast<std::size_t>(P));
    for (int d = 0; d < P; ++d)
      if (d != ctx.rank()) reqs[static_cast<std::size_t>(d)] = req;
    auto asked = ctx.all_to_all_1factor(std::move(reqs));
    std::vector<Bytes> replies(static_cast<std::size_t>(P));
    for (int src = 0; src < P; ++src) {
      if (src == ctx.rank()) continue;
      ByteReader r(asked[static_cast<std::size_t>(src)]);
      ByteWriter w;
      for (auto key : codec::read_delta_varint(r)) {
        if (key >= agg.partial.size()) throw ProtocolError("exact-sum request for unknown key");
        w.put_u64(agg.partial[key]);
      }
      replies[static_cast<std::size_t>(src)] = w.take();
    }
    auto got = ctx.all_to_all_1factor(std::move(replies));
    res.volume.phase5_bytes = ctx.stats().per_collective.back().payload_bytes +
                              ctx.stats().per_collective[ctx.stats().per_collective.size() - 2].payload_bytes;
    std::vector<std::uint64_t> exact(fetch.size(), 0);
    for (std::size_t j = 0; j < fetch.size(); ++j) exact[j] = agg.partial[fetch[j]];
    for (int src = 0; src < P; ++src) {
      if (src == ctx.rank()) continue;
      ByteReader r(got[static_cast<std::size_t>(src)]);
      for (auto& x : exact) x += r.get_u64();
      if (!r.empty()) throw ProtocolError("exact-sum reply does not match request");
    }
    for (std::size_t j = 0; j < fetch.size(); ++j)
      totals[static_cast<std::size_t>(static_cast<std::int64_t>(fetch[j]) - mine.first)] = exact[j];
  }

  ctx.add_counter("approx/phase1_value_bytes", res.volume.phase1_value_bytes);
  ctx.add_counter("approx/keys_pruned", res.volume.keys_pruned);
  ctx.add_counter("approx/keys_fetched", res.volume.keys_fetched);
  ctx.add_counter("approx/bound_width_sum", res.volume.bound_width_sum);

  // 6: exact top-k
  auto g = ctx.phase("approx/select");
  res.top = global_topk(ctx, detail::owner_topk(totals, mine, k, &keep), k, root);
  return res;
}

// ---------------------------------------------------------------------------
// late materialization

using AttrValue = std::variant<std::int64_t, std::string>;

inline void put_attr(ByteWriter& w, const AttrValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) {
    w.put_u8(0);
    w.put_svarint(*i);
  } else {
    w.put_u8(1);
    w.put_string(std::get<std::string>(v));
  }
}

inline AttrValue get_attr(ByteReader& r) {
  auto tag = r.get_u8();
  if (tag == 0) return r.get_svarint();
  if (tag == 1) return r.get_string();
  throw DecodeError("bad attribute tag " + std::to_string(tag));
}

/// Fetches output attributes of rows ranked at root: one scatter of key lists, one gather of values.
/// Returns rows aligned with keys at root, empty elsewhere.
inline std::vector<std::vector<AttrValue>> late_materialize(
    ClusterCtx& ctx, std::span<const std::int64_t> keys, const PartitionLayout& layout,
    const std::function<std::vector<AttrValue>(std::int64_t)>& fetch, int root = 0) {
  const int P = ctx.size();
  std::vector<std::vector<std::uint64_t>> per_owner;
  std::vector<Bytes> requests;
  if (ctx.rank() == root) {
    per_owner = group_by_owner(keys, layout);
    for (const auto& k : per_owner) requests.push_back(codec::delta_varint_encode(k).bytes);
  }
  auto mine_req = ctx.scatter(std::move(requests), root);
  auto mine_keys = detail::decode_owned_keys(mine_req, layout.range(ctx.rank()), ctx.rank(), root);
  ByteWriter w;
  for (auto k : mine_keys) {
    auto row = fetch(static_cast<std::int64_t>(k));
    w.put_varint(row.size());
    for (const auto& v : row) put_attr(w, v);
  }
  ctx.add_scanned(mine_keys.size());
  auto replies = ctx.gather(w.take(), root);
  if (ctx.rank() != root) return {};

  std::vector<std::vector<std::vector<AttrValue>>> by_owner(static_cast<std::size_t>(P));
  for (int o = 0; o < P; ++o) {
    ByteReader r(replies[static_cast<std::size_t>(o)]);
    for (std::size_t i = 0; i < per_owner[static_cast<std::size_t>(o)].size(); ++i) {
      std::vector<AttrValue> row(r.get_varint());
      for (auto& v : row) v = get_attr(r);
      by_owner[static_cast<std::size_t>(o)].push_back(std::move(row));
    }
    if (!r.empty()) throw ProtocolError("late materialization reply has trailing bytes");
  }
  std::vector<std::vector<AttrValue>> out;
  out.reserve(keys.size());
  for (auto key : keys) {
    int o = layout.owner(key);
    const auto& k = per_owner[static_cast<std::size_t>(o)];
    auto idx = static_cast<std::size_t>(std::lower_bound(k.begin(), k.end(), static_cast<std::uint64_t>(key)) - k.begin());
    out.push_back(by_owner[static_cast<std::size_t>(o)][idx]);
  }
  return out;
}

}  // namespace olapnet::dist
