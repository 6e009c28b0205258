// Copyright 2026 The fksim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fk/storage.hpp"

#include <gtest/gtest.h>

namespace fk {
namespace {

KeyValueStore make_store() { return KeyValueStore({"t", "u"}); }

TEST(KeyValueStore, ConditionalUpdateAppliesOnlyWhenConditionsHold) {
  auto st = make_store();
  EXPECT_TRUE(st.conditional_update("t", "k", {field_absent("v")}, {SetField{"v", std::uint64_t{1}}}).applied);
  const auto rejected = st.conditional_update("t", "k", {field_absent("v")}, {SetField{"v", std::uint64_t{2}}});
  EXPECT_FALSE(rejected.applied);
  ASSERT_TRUE(rejected.current);
  EXPECT_EQ(get_u64(*rejected.current, "v"), 1u);
  EXPECT_TRUE(st.conditional_update("t", "k", {field_equals("v", std::uint64_t{1})}, {SetField{"v", std::uint64_t{2}}})
                  .applied);
  EXPECT_EQ(get_u64(*st.read("t", "k"), "v"), 2u);
}

TEST(KeyValueStore, NumericCompareIsFalseOnAbsentField) {
  EXPECT_FALSE(evaluate(numeric_compare("x", Cmp::kLess, 10), nullptr));
  Item item{{"x", std::uint64_t{3}}};
  EXPECT_TRUE(evaluate(numeric_compare("x", Cmp::kLess, 10), &item));
  EXPECT_FALSE(evaluate(numeric_compare("x", Cmp::kGreater, 3), &item));
  EXPECT_TRUE(evaluate(numeric_compare("x", Cmp::kGreaterEqual, 3), &item));
}

TEST(KeyValueStore, AnyOfNeedsOneAlternative) {
  Item item{{"x", std::uint64_t{3}}};
  EXPECT_TRUE(evaluate(any_of({field_absent("x"), field_equals("x", std::uint64_t{3})}), &item));
  EXPECT_FALSE(evaluate(any_of({field_absent("x"), field_equals("x", std::uint64_t{4})}), &item));
}

TEST(KeyValueStore, ListOperations) {
  auto st = make_store();
  st.conditional_update("t", "k", {}, {ListAppend{"l", std::uint64_t{4}}, ListAppend{"l", std::uint64_t{5}},
                                       ListAppend{"l", std::uint64_t{4}}});
  const auto item = st.read("t", "k");
  EXPECT_TRUE(evaluate(list_head_equals("l", std::uint64_t{4}), &*item));
  st.conditional_update("t", "k", {}, {ListRemoveValue{"l", std::uint64_t{4}}});
  EXPECT_EQ(get_u64_list(*st.read("t", "k"), "l"), (U64List{5, 4}));
  st.conditional_update("t", "k", {}, {ListPopFront{"l"}});
  EXPECT_EQ(get_u64_list(*st.read("t", "k"), "l"), (U64List{4}));
  st.conditional_update("t", "k", {}, {ListRemoveValue{"l", std::uint64_t{9}}});
  EXPECT_EQ(get_u64_list(*st.read("t", "k"), "l"), (U64List{4}));
}

TEST(KeyValueStore, CounterBelowZeroIsAProtocolViolation) {
  auto st = make_store();
  st.conditional_update("t", "c", {}, {CounterAdd{"n", 2}});
  EXPECT_THROW(st.conditional_update("t", "c", {}, {CounterAdd{"n", -3}}), ProtocolViolation);
}

TEST(KeyValueStore, TransactionIsAllOrNothing) {
  auto st = make_store();
  st.conditional_update("t", "a", {}, {SetField{"v", std::uint64_t{1}}});
  const auto r = st.transact({WriteOp{"t", "a", {}, {SetField{"v", std::uint64_t{2}}}},
                              WriteOp{"u", "b", {field_equals("v", std::uint64_t{7})}, {SetField{"v", std::uint64_t{8}}}}});
  EXPECT_FALSE(r.applied);
  EXPECT_EQ(r.failed_op, 1u);
  EXPECT_EQ(get_u64(*st.read("t", "a"), "v"), 1u);
  EXPECT_FALSE(st.read("u", "b"));

  EXPECT_TRUE(st.transact({WriteOp{"t", "a", {}, {SetField{"v", std::uint64_t{2}}}},
                           WriteOp{"u", "b", {field_absent("v")}, {SetField{"v", std::uint64_t{8}}}}})
                  .applied);
  EXPECT_EQ(get_u64(*st.read("t", "a"), "v"), 2u);
  EXPECT_EQ(get_u64(*st.read("u", "b"), "v"), 8u);
}

TEST(KeyValueStore, UnknownTableIsAnError) {
  auto st = make_store();
  EXPECT_THROW(st.read("nope", "k"), StorageError);
}

TEST(KeyValueStore, DeleteItemRemovesTheRecord) {
  auto st = make_store();
  st.conditional_update("t", "k", {}, {SetField{"v", std::uint64_t{1}}});
  st.conditional_update("t", "k", {}, {DeleteItem{}});
  EXPECT_FALSE(st.read("t", "k"));
}

TEST(UserStore, RegionsAreIndependent) {
  UserStore us({"r1", "r2"});
  us.put("r1", DataNodeObject{"/a", "x", {}, 1, 1, {3}});
  EXPECT_TRUE(us.get("r1", "/a"));
  EXPECT_FALSE(us.get("r2", "/a"));
  EXPECT_EQ(us.get("r1", "/a")->epoch_snapshot, (std::vector<WatchId>{3}));
  us.remove("r1", "/a");
  EXPECT_FALSE(us.get("r1", "/a"));
  EXPECT_FALSE(us.has_region("r3"));
}

TEST(EpochEntry, EncodeDecode) {
  const EpochEntry e{12, 40};
  const auto back = EpochEntry::decode(e.encode());
  EXPECT_EQ(back.watch, 12u);
  EXPECT_EQ(back.token, 40u);
}

}  // namespace
}  // namespace fk
