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

#include "fk/functions.hpp"

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace fk {
namespace {

using namespace fk::testing;

SystemNodeRecord node(bool exists, Txid mtxid = 0, StrList children = {}) {
  SystemNodeRecord r;
  r.exists = exists;
  r.mtxid = mtxid;
  r.children = std::move(children);
  return r;
}

WriteRequest request(Opcode code, std::optional<Txid> version = std::nullopt) {
  WriteRequest r;
  r.op = code;
  r.path = "/a/b";
  r.version = version;
  return r;
}

TEST(Validation, Create) {
  EXPECT_EQ(is_valid(request(Opcode::kCreate), node(false), node(false)), FailureReason::kNoParent);
  auto eph = node(true);
  eph.ephemeral_owner = "s1";
  EXPECT_EQ(is_valid(request(Opcode::kCreate), node(false), eph), FailureReason::kNoChildrenForEphemerals);
  EXPECT_EQ(is_valid(request(Opcode::kCreate), node(true), node(true)), FailureReason::kNodeExists);
  EXPECT_EQ(is_valid(request(Opcode::kCreate), node(false), node(true)), std::nullopt);
}

TEST(Validation, SetDataComparesVersionWithMtxid) {
  EXPECT_EQ(is_valid(request(Opcode::kSetData), node(false), node(true)), FailureReason::kNoNode);
  EXPECT_EQ(is_valid(request(Opcode::kSetData, 4), node(true, 3), node(true)), FailureReason::kBadVersion);
  EXPECT_EQ(is_valid(request(Opcode::kSetData, 3), node(true, 3), node(true)), std::nullopt);
  EXPECT_EQ(is_valid(request(Opcode::kSetData), node(true, 3), node(true)), std::nullopt);
}

TEST(Validation, Delete) {
  EXPECT_EQ(is_valid(request(Opcode::kDelete), node(false), node(true)), FailureReason::kNoNode);
  EXPECT_EQ(is_valid(request(Opcode::kDelete, 1), node(true, 2), node(true)), FailureReason::kBadVersion);
  EXPECT_EQ(is_valid(request(Opcode::kDelete), node(true, 2, {"c"}), node(true)), FailureReason::kNotEmpty);
  EXPECT_EQ(is_valid(request(Opcode::kDelete), node(true, 2), node(true)), std::nullopt);
}

TEST(Watches, KindsFiredByEachChange) {
  using K = std::vector<WatchKind>;
  EXPECT_EQ(fired_kinds(NodeChange::kCreated), (K{WatchKind::kExists}));
  EXPECT_EQ(fired_kinds(NodeChange::kDataChanged), (K{WatchKind::kData, WatchKind::kExists}));
  EXPECT_EQ(fired_kinds(NodeChange::kDeleted), (K{WatchKind::kData, WatchKind::kExists, WatchKind::kChildren}));
  EXPECT_EQ(fired_kinds(NodeChange::kChildrenChanged), (K{WatchKind::kChildren}));
}

TEST(Watches, RegistrationJoinsALiveRecord) {
  KeyValueStore st({std::string(tables::kWatches), std::string(tables::kCounters)});
  const auto a = register_watch(st, "/a", WatchKind::kData, "s1");
  const auto b = register_watch(st, "/a", WatchKind::kData, "s2");
  const auto c = register_watch(st, "/a", WatchKind::kChildren, "s1");
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(SequentialNames, AreZeroPaddedToTenDigits) {
  EXPECT_EQ(sequential_name("/q-", 0), "/q-0000000000");
  EXPECT_EQ(sequential_name("/a/n", 1234567), "/a/n0001234567");
}

// End-to-end fault handling: every crash point leaves a consistent run.

struct FaultCase {
  StepLabel point;
  FaultMode mode;
};

void PrintTo(const FaultCase& c, std::ostream* out) { *out << to_string(c.point) << '/' << to_string(c.mode); }

class CrashPoint : public ::testing::TestWithParam<FaultCase> {};

std::string case_name(const ::testing::TestParamInfo<FaultCase>& info) {
  std::string name = std::string(to_string(info.param.point)) + "_" + std::string(to_string(info.param.mode));
  for (auto& c : name) {
    if (c == '-') c = '_';
  }
  return name;
}

TEST_P(CrashPoint, RunStaysConsistent) {
  auto c = two_sessions({op("s1", Opcode::kCreate, "/a", "x"), watched(op("s2", Opcode::kGetData, "/a")),
                         op("s1", Opcode::kSetData, "/a", "y"), ephemeral(op("s1", Opcode::kCreate, "/a/e")),
                         op("s2", Opcode::kExists, "/a/e"), op("s2", Opcode::kSetData, "/a", "z")});
  c.faults = {fault(GetParam().point, GetParam().mode)};
  const auto run = run_to_quiescence(c);
  EXPECT_EQ(run.faults_fired, 1u);
  const auto report = check_all(run.trace);
  EXPECT_TRUE(report.passed()) << report.format();
  EXPECT_TRUE(run.dirty_nodes.empty());
}

INSTANTIATE_TEST_SUITE_P(
    Writer, CrashPoint,
    ::testing::Values(FaultCase{StepLabel::kBeforeLock, FaultMode::kCrashBefore},
                      FaultCase{StepLabel::kAfterLock, FaultMode::kCrashBefore},
                      FaultCase{StepLabel::kAfterLock, FaultMode::kCrashAfter},
                      FaultCase{StepLabel::kBeforePush, FaultMode::kCrashAfter},
                      FaultCase{StepLabel::kAfterCommitBeforeUnlock, FaultMode::kCrashBefore},
                      FaultCase{StepLabel::kAfterCommitBeforeUnlock, FaultMode::kCrashAfter}),
    case_name);

INSTANTIATE_TEST_SUITE_P(
    Distributor, CrashPoint,
    ::testing::Values(FaultCase{StepLabel::kBeforeTryCommit, FaultMode::kCrashBefore},
                      FaultCase{StepLabel::kAfterTryCommit, FaultMode::kCrashAfter},
                      FaultCase{StepLabel::kAfterDataUpdate, FaultMode::kCrashBefore},
                      FaultCase{StepLabel::kAfterDataUpdate, FaultMode::kCrashAfter},
                      FaultCase{StepLabel::kAfterInvokeWatch, FaultMode::kCrashBefore},
                      FaultCase{StepLabel::kBeforePopTransaction, FaultMode::kCrashBefore},
                      FaultCase{StepLabel::kBeforePopTransaction, FaultMode::kCrashAfter}),
    case_name);

INSTANTIATE_TEST_SUITE_P(Watch, CrashPoint,
                         ::testing::Values(FaultCase{StepLabel::kBeforeDeliver, FaultMode::kCrashBefore},
                                           FaultCase{StepLabel::kAfterDeliver, FaultMode::kCrashBefore},
                                           FaultCase{StepLabel::kAfterDeliver, FaultMode::kCrashAfter}),
                         case_name);

TEST(Writer, RetriedRequestCommitsOnce) {
  auto c = two_sessions({op("s1", Opcode::kCreate, "/a", "x")});
  c.faults = {fault(StepLabel::kAfterCommitBeforeUnlock, FaultMode::kCrashBefore)};
  const auto run = run_to_quiescence(c);
  EXPECT_EQ(count(run.trace, EventKind::kCommit), 1u);
  EXPECT_EQ(count(run.trace, EventKind::kInvokeCrash), 1u);
  ASSERT_EQ(run.results.at("s1").size(), 2u);
  EXPECT_TRUE(run.results.at("s1")[0].success);
  EXPECT_EQ(run.tree.at("/a").data, "x");
}

TEST(Writer, SequentialCreateReportsTheGeneratedName) {
  auto c = two_sessions({sequential(op("s1", Opcode::kCreate, "/job-")), sequential(op("s1", Opcode::kCreate, "/job-"))});
  const auto run = run_to_quiescence(c);
  const auto& r = run.results.at("s1");
  EXPECT_EQ(r[0].result_path, "/job-0000000000");
  EXPECT_EQ(r[1].result_path, "/job-0000000001");
  EXPECT_TRUE(run.tree.contains("/job-0000000001"));
}

TEST(Writer, CloseRemovesEphemerals) {
  auto c = two_sessions({ephemeral(op("s1", Opcode::kCreate, "/e")), op("s2", Opcode::kCreate, "/p")});
  const auto run = run_to_quiescence(c);
  EXPECT_FALSE(run.tree.contains("/e"));
  EXPECT_TRUE(run.tree.contains("/p"));
  EXPECT_EQ(run.sessions.at("s1"), SessionStatus::kClosed);
}

TEST(Distributor, FinishesTheCommitOfACrashedWriter) {
  // Sequence-number mode without retries: the writer dies between push and
  // commit and is never retried, so only the distributor can commit.
  auto c = two_sessions({op("s1", Opcode::kCreate, "/a", "x")});
  c.queue_mode = QueueMode::kSequenceNumber;
  c.retry_cap = 1;
  c.faults = {fault(StepLabel::kBetweenPushAndCommit)};
  const auto run = run_to_quiescence(c);
  ASSERT_EQ(run.faults_fired, 1u);
  bool by_distributor = false;
  for (const auto& e : run.trace.events()) {
    if (e.kind == EventKind::kCommit) by_distributor = e.payload.at("by") == "distributor";
  }
  EXPECT_TRUE(by_distributor);
  EXPECT_TRUE(run.results.at("s1")[0].success);
  EXPECT_TRUE(check_atomicity(run.trace).passed);
  EXPECT_TRUE(run.dirty_nodes.empty());
}

TEST(Heartbeat, EvictsASilentSessionAndItsEphemerals) {
  auto c = two_sessions({ephemeral(op("s1", Opcode::kCreate, "/lease")), op("s1", Opcode::kSetData, "/lease", "v"),
                         op("s2", Opcode::kCreate, "/keep")});
  c.unresponsive = {{"s1", 1}};
  const auto run = run_to_quiescence(c);
  EXPECT_EQ(count(run.trace, EventKind::kSessionEvicted), 1u);
  EXPECT_FALSE(run.tree.contains("/lease"));
  EXPECT_TRUE(run.tree.contains("/keep"));
  EXPECT_EQ(run.sessions.at("s1"), SessionStatus::kClosed);
  EXPECT_TRUE(check_all(run.trace).passed());
}

TEST(Heartbeat, CrashDuringPingIsRetried) {
  auto c = two_sessions({ephemeral(op("s1", Opcode::kCreate, "/lease"))});
  c.unresponsive = {{"s1", 1}};
  c.faults = {fault(StepLabel::kBeforePing)};
  const auto run = run_to_quiescence(c);
  EXPECT_EQ(run.faults_fired, 1u);
  EXPECT_FALSE(run.tree.contains("/lease"));
  EXPECT_TRUE(check_all(run.trace).passed());
}

}  // namespace
}  // namespace fk
