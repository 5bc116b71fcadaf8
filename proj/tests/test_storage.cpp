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

#include <gtest/gtest.h>

#include <random>

#include "olapnet/storage.hpp"

using namespace olapnet;

TEST(RangePartition, EvenSplit) {
  auto r = range_partition(10, 2);
  EXPECT_EQ(r, (std::vector<RowRange>{{0, 5}, {5, 5}}));
}

TEST(RangePartition, LargerRangesFirst) {
  auto r = range_partition(7, 3);
  EXPECT_EQ(r, (std::vector<RowRange>{{0, 3}, {3, 2}, {5, 2}}));
}

TEST(RangePartition, EmptyInput) {
  auto r = range_partition(0, 4);
  ASSERT_EQ(r.size(), 4u);
  for (const auto& x : r) EXPECT_EQ(x.count, 0);
}

TEST(RangePartition, Errors) {
  EXPECT_THROW(range_partition(5, 0), InvalidArgument);
  EXPECT_THROW(range_partition(-1, 2), InvalidArgument);
  EXPECT_THROW(PartitionLayout({{0, 2}, {3, 1}}), InvalidArgument);
}

TEST(Owner, SimpleCases) {
  auto l = PartitionLayout::even(10, 2);
  EXPECT_EQ(l.owner(0), 0);
  EXPECT_EQ(l.owner(5), 1);
  EXPECT_EQ(global_to_owner(9, l), 1);
  EXPECT_THROW(l.owner(10), InvalidArgument);
  EXPECT_THROW(l.owner(-1), InvalidArgument);
}

TEST(Owner, MatchesLinearScan) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    int P = 1 + static_cast<int>(rng() % 16);
    std::int64_t n = 1 + static_cast<std::int64_t>(rng() % 100);
    auto l = PartitionLayout::even(n, P);
    for (std::int64_t g = 0; g < n; ++g) {
      int want = -1;
      for (int i = 0; i < P; ++i)
        if (g >= l.range(i).first && g < l.range(i).end()) want = i;
      ASSERT_EQ(l.owner(g), want);
    }
  }
}

TEST(Owner, SkipsEmptyRanges) {
  PartitionLayout l({{0, 3}, {3, 0}, {3, 0}, {3, 2}});
  EXPECT_EQ(l.owner(2), 0);
  EXPECT_EQ(l.owner(3), 3);
}

TEST(ColumnTable, RowCountChecked) {
  auto info = PartitionLayout::even(4, 1).info(0);
  ColumnTable t("t", info);
  EXPECT_THROW(t.add_column("a", Column::ints({1, 2})), InvalidArgument);
  t.add_column("a", Column::ints({1, 2, 3, 4}));
  EXPECT_TRUE(t.has("a"));
  EXPECT_THROW(t.col("b"), InvalidArgument);
  auto dict = std::make_shared<const std::vector<std::string>>(std::vector<std::string>{"x"});
  EXPECT_THROW(t.add_column("s", Column::strings({0, 1, 0, 0}, dict)), InvalidArgument);
}

TEST(ColumnTable, LocalRow) {
  auto l = PartitionLayout::even(10, 3);
  ColumnTable t("t", l.info(1));
  EXPECT_EQ(t.local_row(4), 0);
  EXPECT_EQ(t.local_row(6), 2);
  EXPECT_THROW(t.local_row(7), InvalidArgument);
  EXPECT_THROW(t.local_row(0), InvalidArgument);
}

TEST(JoinIndex, LocalityAndOffsets) {
  auto parents = PartitionLayout::even(4, 2);
  auto children = PartitionLayout({{0, 5}, {5, 3}});
  ColumnTable c0("child", children.info(0));
  c0.add_column("fk", Column::ints({1, 1, 2, 2, 2}));
  auto ji = build_join_index(c0, "fk", "parent", parents.info(0));
  EXPECT_EQ(ji.parent_locality, Locality::Local);
  EXPECT_EQ(ji.child_to_parent, (std::vector<std::int64_t>{0, 0, 1, 1, 1}));
  EXPECT_EQ(build_child_offsets(ji, parents.info(0)), (std::vector<std::int64_t>{0, 2, 5}));

  ColumnTable c1("child", children.info(1));
  c1.add_column("fk", Column::ints({3, 1, 4}));
  auto remote = build_join_index(c1, "fk", "parent", parents.info(1));
  EXPECT_EQ(remote.parent_locality, Locality::Remote);
  EXPECT_THROW(build_child_offsets(remote, parents.info(1)), InvalidArgument);
}

TEST(JoinIndex, DanglingKeyIsIntegrityError) {
  auto parents = PartitionLayout::even(2, 1);
  ColumnTable c("child", PartitionLayout::even(1, 1).info(0));
  c.add_column("fk", Column::ints({3}));
  EXPECT_THROW(build_join_index(c, "fk", "parent", parents.info(0)), IntegrityError);
}

TEST(JoinIndex, UngroupedChildrenRejected) {
  auto parents = PartitionLayout::even(2, 1);
  ColumnTable c("child", PartitionLayout::even(3, 1).info(0));
  c.add_column("fk", Column::ints({2, 1, 2}));
  auto ji = build_join_index(c, "fk", "parent", parents.info(0));
  EXPECT_THROW(build_child_offsets(ji, parents.info(0)), InvalidArgument);
}
