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
 * @file storage.hpp
 * @brief Range-partitioned columnar tables and join indexes.
 *
 * A ColumnTable is one node's slice of a relation. Rows are identified by
 * their global row id; the node owns the contiguous range
 * [first_global_row, first_global_row + row_count). Tables with at most
 * 50 rows may instead be replicated in full on every node.
 */

#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "olapnet/error.hpp"

namespace olapnet {

enum class ColumnKind : std::uint8_t {
  Int64,
  Decimal,     // integer hundredths
  Date,        // days since 1970-01-01
  DictString,  // codes into a dictionary
};

inline constexpr std::size_t kMaxReplicatedRows = 50;

struct Column {
  ColumnKind kind = ColumnKind::Int64;
  std::vector<std::int64_t> values;
  std::shared_ptr<const std::vector<std::string>> dictionary;

  static Column ints(std::vector<std::int64_t> v) { return {ColumnKind::Int64, std::move(v), nullptr}; }
  static Column decimals(std::vector<std::int64_t> v) { return {ColumnKind::Decimal, std::move(v), nullptr}; }
  static Column dates(std::vector<std::int64_t> v) { return {ColumnKind::Date, std::move(v), nullptr}; }
  static Column strings(std::vector<std::int64_t> codes, std::shared_ptr<const std::vector<std::string>> dict) {
    return {ColumnKind::DictString, std::move(codes), std::move(dict)};
  }

  std::size_t size() const { return values.size(); }
  std::int64_t operator[](std::size_t row) const { return values[row]; }

  std::string_view str(std::size_t row) const { return (*dictionary)[static_cast<std::size_t>(values[row])]; }

  void validate() const {
    if (kind != ColumnKind::DictString) return;
    if (!dictionary) throw InvalidArgument("dict-string column without dictionary");
    auto n = static_cast<std::int64_t>(dictionary->size());
    for (auto c : values)
      if (c < 0 || c >= n) throw InvalidArgument("dictionary code " + std::to_string(c) + " out of range");
  }
};

/// Compares decoded contents; dictionaries may differ as long as strings agree.
inline bool same_contents(const Column& a, const Column& b) {
  if (a.kind != b.kind || a.size() != b.size()) return false;
  if (a.kind != ColumnKind::DictString) return a.values == b.values;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.str(i) != b.str(i)) return false;
  return true;
}

struct PartitionInfo {
  std::int64_t total_rows = 0;
  int node_id = 0;
  int P = 1;
  std::int64_t first_global_row = 0;
  std::int64_t row_count = 0;
  bool replicated = false;

  bool owns(std::int64_t global_row) const {
    return replicated ? (global_row >= 0 && global_row < total_rows)
                      : (global_row >= first_global_row && global_row < first_global_row + row_count);
  }
};

struct RowRange {
  std::int64_t first = 0;
  std::int64_t count = 0;

  std::int64_t end() const { return first + count; }
  friend bool operator==(const RowRange&, const RowRange&) = default;
};

/// Splits [0, total_rows) into P contiguous ranges whose sizes differ by at most one.
/// The larger ranges go to the lower node ids.
inline std::vector<RowRange> range_partition(std::int64_t total_rows, int P) {
  if (P <= 0) throw InvalidArgument("range_partition: P must be >= 1");
  if (total_rows < 0) throw InvalidArgument("range_partition: negative row count");
  std::vector<RowRange> out;
  out.reserve(static_cast<std::size_t>(P));
  std::int64_t base = total_rows / P, extra = total_rows % P, first = 0;
  for (int i = 0; i < P; ++i) {
    std::int64_t n = base + (i < extra ? 1 : 0);
    out.push_back({first, n});
    first += n;
  }
  return out;
}

/// Global partition layout of one table: which node owns which row range.
class PartitionLayout {
 public:
  PartitionLayout() = default;

  explicit PartitionLayout(std::vector<RowRange> ranges) : ranges_(std::move(ranges)) {
    std::int64_t expect = 0;
    for (const auto& r : ranges_) {
      if (r.first != expect || r.count < 0) throw InvalidArgument("partition ranges must be contiguous and disjoint");
      expect = r.end();
    }
    total_ = expect;
  }

  static PartitionLayout even(std::int64_t total_rows, int P) { return PartitionLayout(range_partition(total_rows, P)); }

  int nodes() const { return static_cast<int>(ranges_.size()); }
  std::int64_t total_rows() const { return total_; }
  const RowRange& range(int node) const { return ranges_.at(static_cast<std::size_t>(node)); }
  std::span<const RowRange> ranges() const { return ranges_; }

  /// Node owning global_row; binary search over the range starts.
  int owner(std::int64_t global_row) const {
    if (global_row < 0 || global_row >= total_)
      throw InvalidArgument("global row " + std::to_string(global_row) + " outside [0, " + std::to_string(total_) + ")");
    auto it = std::upper_bound(ranges_.begin(), ranges_.end(), global_row,
                               [](std::int64_t row, const RowRange& r) { return row < r.first; });
    // Empty ranges share their start with the next range; step back to a non-empty one.
    auto idx = static_cast<int>(it - ranges_.begin()) - 1;
    while (ranges_[static_cast<std::size_t>(idx)].count == 0) --idx;
    return idx;
  }

  PartitionInfo info(int node, bool replicated = false) const {
    const auto& r = range(node);
    return PartitionInfo{total_, node, nodes(), r.first, r.count, replicated};
  }

  friend bool operator==(const PartitionLayout&, const PartitionLayout&) = default;

 private:
  std::vector<RowRange> ranges_;
  std::int64_t total_ = 0;
};

inline int global_to_owner(std::int64_t global_row, const PartitionLayout& layout) { return layout.owner(global_row); }

class ColumnTable {
 public:
  ColumnTable() = default;
  ColumnTable(std::string name, PartitionInfo partition) : name_(std::move(name)), partition_(partition) {
    if (partition_.replicated && partition_.total_rows > static_cast<std::int64_t>(kMaxReplicatedRows))
      throw InvalidArgument("table " + name_ + " too large to replicate");
  }

  const std::string& name() const { return name_; }
  std::int64_t row_count() const { return partition_.row_count; }
  const PartitionInfo& partition() const { return partition_; }

  void add_column(std::string name, Column c) {
    if (static_cast<std::int64_t>(c.size()) != partition_.row_count)
      throw InvalidArgument("column " + name + " has " + std::to_string(c.size()) + " rows, table " + name_ +
                            " has " + std::to_string(partition_.row_count));
    c.validate();
    columns_.emplace_back(std::move(name), std::move(c));
  }

  bool has(std::string_view name) const {
    return std::any_of(columns_.begin(), columns_.end(), [&](const auto& p) { return p.first == name; });
  }

  const Column& col(std::string_view name) const {
    for (const auto& [n, c] : columns_)
      if (n == name) return c;
    throw InvalidArgument("table " + name_ + " has no column " + std::string(name));
  }

  const std::vector<std::pair<std::string, Column>>& columns() const { return columns_; }

  std::int64_t local_row(std::int64_t global_row) const {
    if (!partition_.owns(global_row))
      throw InvalidArgument("row " + std::to_string(global_row) + " not held by this partition of " + name_);
    return partition_.replicated ? global_row : global_row - partition_.first_global_row;
  }

 private:
  std::string name_;
  PartitionInfo partition_;
  std::vector<std::pair<std::string, Column>> columns_;
};

enum class Locality : std::uint8_t { Local, Remote };

struct JoinIndex {
  std::string parent_table;
  std::string child_table;
  std::vector<std::int64_t> child_to_parent;  // global parent row per local child row
  Locality parent_locality = Locality::Local;
};

/// Maps a foreign key value to a global parent row. TPC-H keys are dense and 1-based.
using KeyToRow = std::function<std::int64_t(std::int64_t)>;

inline std::int64_t dense_key_to_row(std::int64_t key) { return key - 1; }

inline JoinIndex build_join_index(const ColumnTable& child, std::string_view fk_column, std::string parent_table,
                                  const PartitionInfo& parent, const KeyToRow& key_to_row = dense_key_to_row) {
  const auto& fk = child.col(fk_column);
  JoinIndex ji{std::move(parent_table), child.name(), {}, Locality::Local};
  ji.child_to_parent.reserve(fk.size());
  bool local = true;
  for (std::size_t i = 0; i < fk.size(); ++i) {
    std::int64_t row = key_to_row(fk[i]);
    if (row < 0 || row >= parent.total_rows)
      throw IntegrityError(child.name() + "." + std::string(fk_column) + " row " + std::to_string(i) + ": key " +
                           std::to_string(fk[i]) + " has no row in " + ji.parent_table);
    local = local && parent.owns(row);
    ji.child_to_parent.push_back(row);
  }
  ji.parent_locality = local ? Locality::Local : Locality::Remote;
  return ji;
}

/// Parent-to-children offsets for a local one-to-many index whose child rows are
/// grouped by parent in parent order. Children of local parent p are
/// [offsets[p], offsets[p + 1]).
inline std::vector<std::int64_t> build_child_offsets(const JoinIndex& ji, const PartitionInfo& parent) {
  if (ji.parent_locality != Locality::Local) throw InvalidArgument("child offsets need a local join index");
  std::vector<std::int64_t> offsets(static_cast<std::size_t>(parent.row_count) + 1, 0);
  std::int64_t prev = -1;
  for (auto g : ji.child_to_parent) {
    std::int64_t p = parent.replicated ? g : g - parent.first_global_row;
    if (p < prev) throw InvalidArgument("child rows of " + ji.child_table + " are not grouped by parent");
    prev = p;
    ++offsets[static_cast<std::size_t>(p) + 1];
  }
  for (std::size_t i = 1; i < offsets.size(); ++i) offsets[i] += offsets[i - 1];
  return offsets;
}

}  // namespace olapnet
