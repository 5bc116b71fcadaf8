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

// Q13 customer distribution. Qualifying orders are counted per customer and
// the counts sent to the customer owners, which build the histogram of
// orders per customer (customers without orders included).

#pragma once

#include "olapnet/queries/common.hpp"

namespace olapnet::queries {

inline const std::vector<std::string>& q13_columns() {
  static const std::vector<std::string> c = {"c_count", "custdist"};
  return c;
}

inline std::string q13_pattern(const QueryParams& p) {
  p.check_keys(13, {"WORD1", "WORD2"});
  return "%" + p.str("WORD1", "special") + "%" + p.str("WORD2", "requests") + "%";
}

/// Merges sorted (c_count, customers) histograms: [varint n][(varint count, varint customers) ...]
inline ReduceOperator histogram_merge_op() {
  auto decode = [](const Bytes& b) {
    ByteReader r(b);
    std::map<std::int64_t, std::int64_t> m;
    auto n = r.get_varint();
    for (std::uint64_t i = 0; i < n; ++i) {
      auto c = static_cast<std::int64_t>(r.get_varint());
      m[c] += static_cast<std::int64_t>(r.get_varint());
    }
    return m;
  };
  return {"histogram_merge",
          [decode](const Bytes& a, const Bytes& b) {
            auto m = decode(a);
            for (const auto& [c, n] : decode(b)) m[c] += n;
            ByteWriter w;
            w.put_varint(m.size());
            for (const auto& [c, n] : m) {
              w.put_varint(static_cast<std::uint64_t>(c));
              w.put_varint(static_cast<std::uint64_t>(n));
            }
            return w.take();
          },
          std::nullopt};
}

inline QueryResult q13_rows(const std::map<std::int64_t, std::int64_t>& hist) {
  std::vector<std::pair<std::int64_t, std::int64_t>> rows(hist.begin(), hist.end());
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first > b.first;
  });
  QueryResult res{q13_columns(), {}};
  for (const auto& [c, n] : rows) res.rows.push_back({c, n});
  return res;
}

inline QueryResult run_q13(ClusterCtx& ctx, const Database& db, const QueryParams& params, const std::string& variant) {
  check_variant(13, variant);
  const auto& comment = db.orders.col("o_comment");
  const auto excluded = like_mask(comment, q13_pattern(params));
  std::map<std::int64_t, std::int64_t> counts;
  for (std::size_t o = 0; o < comment.size(); ++o)
    if (!excluded[static_cast<std::size_t>(comment[o])]) ++counts[db.orders_customer.child_to_parent[o]];
  ctx.add_scanned(comment.size());

  auto per_customer = sum_counts_at_owners(ctx, counts, db.layout(TableId::Customer));
  std::map<std::int64_t, std::int64_t> hist;
  for (auto c : per_customer) ++hist[c];
  ByteWriter w;
  w.put_varint(hist.size());
  for (const auto& [c, n] : hist) {
    w.put_varint(static_cast<std::uint64_t>(c));
    w.put_varint(static_cast<std::uint64_t>(n));
  }
  auto merged = ctx.reduce(w.take(), histogram_merge_op(), 0);
  if (ctx.rank() != 0) return {q13_columns(), {}};
  ByteReader r(*merged);
  std::map<std::int64_t, std::int64_t> total;
  auto n = r.get_varint();
  for (std::uint64_t i = 0; i < n; ++i) {
    auto c = static_cast<std::int64_t>(r.get_varint());
    total[c] = static_cast<std::int64_t>(r.get_varint());
  }
  return q13_rows(total);
}

}  // namespace olapnet::queries
