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

#include "fk/checker.hpp"

#include <functional>

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace fk {
namespace {

using namespace fk::testing;

/// Copies `t`, letting `edit` change events or drop them by returning false.
Trace rebuild(const Trace& t, const std::function<bool(TraceEvent&)>& edit) {
  Trace out;
  for (auto e : t.events()) {
    if (edit(e)) out.append(std::move(e));
  }
  return out;
}

bool is_write_result(const TraceEvent& e, const std::string& session) {
  return e.kind == EventKind::kClientResult && e.session == session && e.payload.at("success").get<bool>() &&
         e.txid.has_value();
}

Trace baseline() {
  auto c = two_sessions({op("s1", Opcode::kCreate, "/a", "x"), op("s1", Opcode::kSetData, "/a", "y"),
                         op("s1", Opcode::kGetData, "/a"), op("s1", Opcode::kGetData, "/a"),
                         watched(op("s2", Opcode::kExists, "/b")), op("s1", Opcode::kCreate, "/b")});
  return run_to_quiescence(c).trace;
}

TEST(Checker, FaultFreeRunPassesEveryCheck) {
  const auto report = check_all(baseline());
  EXPECT_TRUE(report.passed()) << report.format();
  EXPECT_EQ(report.checks.size(), 6u);
}

TEST(Checker, FormatNamesEachCheck) {
  const auto text = check_all(baseline()).format();
  for (const char* name : {"atomicity", "linearized-writes", "single-system-image", "ordered-notifications",
                           "epoch-balance", "liveness"}) {
    EXPECT_NE(text.find(std::string(name) + " PASS"), std::string::npos) << name;
  }
}

TEST(Checker, PartialCommitBreaksAtomicity) {
  // The final system state keeps the old data: the commit reached only part
  // of the storage.
  const auto t = rebuild(baseline(), [](TraceEvent& e) {
    if (e.kind == EventKind::kFinalState && e.payload.value("store", "") == "system" && e.path == "/a") {
      e.payload["data"] = base64_encode("x");
    }
    return true;
  });
  const auto r = check_atomicity(t);
  EXPECT_FALSE(r.passed);
  EXPECT_FALSE(r.counterexample.empty());
}

TEST(Checker, SuccessWithoutCommitBreaksAtomicity) {
  bool dropped = false;
  const auto t = rebuild(baseline(), [&](TraceEvent& e) {
    if (e.kind == EventKind::kCommit && !dropped) {
      dropped = true;
      return false;
    }
    return true;
  });
  EXPECT_FALSE(check_atomicity(t).passed);
}

TEST(Checker, PerSessionTxidInversionBreaksLinearizedWrites) {
  const auto base = baseline();
  std::vector<Txid> txids;
  for (const auto& e : base.events()) {
    if (is_write_result(e, "s1")) txids.push_back(*e.txid);
  }
  ASSERT_GE(txids.size(), 2u);
  std::size_t seen = 0;
  const auto t = rebuild(base, [&](TraceEvent& e) {
    if (is_write_result(e, "s1") && seen < 2) e.txid = txids[1 - seen++];
    return true;
  });
  EXPECT_FALSE(check_linearized_writes(t).passed);
}

TEST(Checker, ReadingAnOlderVersionBreaksSingleSystemImage) {
  // s1 reads /a at the set's version twice; rewrite the second read to the
  // create's version.
  const auto base = baseline();
  Txid created = 0;
  for (const auto& e : base.events()) {
    if (e.kind == EventKind::kCommit && e.path == "/a" && !created) created = *e.txid;
  }
  int reads = 0;
  const auto t = rebuild(base, [&](TraceEvent& e) {
    if (e.kind == EventKind::kClientReadObserve && e.session == "s1" && e.path == "/a" && ++reads == 2) {
      e.txid = created;
      e.payload["data"] = base64_encode("x");
    }
    return true;
  });
  ASSERT_EQ(reads, 2);
  EXPECT_FALSE(check_single_system_image(t).passed);
}

TEST(Checker, UnknownVersionBreaksSingleSystemImage) {
  const auto t = rebuild(baseline(), [](TraceEvent& e) {
    if (e.kind == EventKind::kClientReadObserve && e.path == "/a") e.txid = 999;
    return true;
  });
  EXPECT_FALSE(check_single_system_image(t).passed);
}

Trace notification_fixture(bool data_first) {
  Trace t;
  auto observe = [&] {
    t.record(1, EventKind::kClientReadObserve, "s2", 5, "/a",
             {{"ticket", 2}, {"op", "get-data"}, {"exists", true}, {"data", ""}, {"children", nlohmann::json::array()}});
  };
  t.record(0, EventKind::kNotifySent, "s2", 3, "/a", {{"watch", 1}, {"event", "data-changed"}, {"region", "r2"}});
  if (data_first) observe();
  t.record(2, EventKind::kNotifyReceived, "s2", 3, "/a", {{"watch", 1}, {"event", "data-changed"}, {"duplicate", false}});
  if (!data_first) observe();
  return t;
}

TEST(Checker, DataBeforeNotificationBreaksOrdering) {
  EXPECT_TRUE(check_ordered_notifications(notification_fixture(false)).passed);
  const auto r = check_ordered_notifications(notification_fixture(true));
  EXPECT_FALSE(r.passed);
}

TEST(Checker, LostOrDoubledNotificationBreaksOrdering) {
  auto doubled = notification_fixture(false);
  doubled.record(3, EventKind::kNotifyReceived, "s2", 3, "/a",
                 {{"watch", 1}, {"event", "data-changed"}, {"duplicate", false}});
  EXPECT_FALSE(check_ordered_notifications(doubled).passed);

  const auto lost = rebuild(notification_fixture(false),
                            [](TraceEvent& e) { return e.kind != EventKind::kNotifyReceived; });
  EXPECT_FALSE(check_ordered_notifications(lost).passed);
}

TEST(Checker, NonEmptyEpochBreaksBalance) {
  const auto t = rebuild(baseline(), [](TraceEvent& e) {
    if (e.kind == EventKind::kFinalState && e.payload.value("store", "") == "epoch") {
      e.payload["entries"] = nlohmann::json::array({EpochEntry{1, 7}.encode()});
    }
    return true;
  });
  EXPECT_FALSE(check_epoch_balance(t).passed);
}

TEST(Checker, MissingEpochStateBreaksBalance) {
  const auto t = rebuild(baseline(), [](TraceEvent& e) {
    return !(e.kind == EventKind::kFinalState && e.payload.value("store", "") == "epoch");
  });
  EXPECT_FALSE(check_epoch_balance(t).passed);
}

TEST(Checker, MissingResultBreaksLiveness) {
  bool dropped = false;
  const auto t = rebuild(baseline(), [&](TraceEvent& e) {
    if (e.kind == EventKind::kClientResult && !dropped) {
      dropped = true;
      return false;
    }
    return true;
  });
  EXPECT_FALSE(check_liveness(t).passed);
}

TEST(Checker, UnendedInvocationBreaksLiveness) {
  const auto t = rebuild(baseline(), [](TraceEvent& e) { return e.kind != EventKind::kInvokeComplete; });
  EXPECT_FALSE(check_liveness(t).passed);
}

TEST(Checker, ParsedTraceChecksLikeTheOriginal) {
  const auto t = baseline();
  EXPECT_EQ(check_all(Trace::parse(t.serialize())).format(), check_all(t).format());
}

}  // namespace
}  // namespace fk
