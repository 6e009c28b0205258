#include "fk/sync.hpp"

#include <gtest/gtest.h>

#include "fk/contention.hpp"

namespace fk {
namespace {

KeyValueStore nodes() { return KeyValueStore({std::string(tables::kNodes), std::string(tables::kCounters)}); }

SystemNodeRecord record(const KeyValueStore& st) {
  const auto item = st.read(tables::kNodes, "/n");
  return SystemNodeRecord::from_item("/n", item ? &*item : nullptr);
}

void hold(KeyValueStore& st, SimTime ts, std::uint64_t token) {
  ASSERT_TRUE(lock_acquire(st, "/n", {ts, token}, 20).acquired);
}

TEST(TimedLock, FreeLockIsAcquired) {
  auto st = nodes();
  const auto r = lock_acquire(st, "/n", {10, 1}, 20);
  EXPECT_TRUE(r.acquired);
  EXPECT_FALSE(r.old_record);
}

TEST(TimedLock, LiveHolderKeepsTheLock) {
  auto st = nodes();
  hold(st, 5, 1);
  EXPECT_FALSE(lock_acquire(st, "/n", {10, 2}, 20).acquired);
  EXPECT_FALSE(lock_acquire(st, "/n", {25, 2}, 20).acquired);  // difference 20 is not greater than 20
}

TEST(TimedLock, ExpiredHolderIsDisplaced) {
  auto st = nodes();
  hold(st, 5, 1);
  const auto r = lock_acquire(st, "/n", {30, 2}, 20);
  EXPECT_TRUE(r.acquired);
  ASSERT_TRUE(r.old_record);
  EXPECT_EQ(r.old_record->lock_ts, 5u);
}

TEST(TimedLock, ReleaseNeedsTheStoredHolder) {
  auto st = nodes();
  hold(st, 5, 1);
  EXPECT_EQ(lock_release(st, "/n", {5, 1}), LockOutcome::kReleased);
  EXPECT_EQ(lock_release(st, "/n", {5, 1}), LockOutcome::kLost);
  EXPECT_EQ(lock_release(st, "/missing", {5, 1}), LockOutcome::kLost);
}

TEST(TimedLock, DisplacedHolderCannotReleaseOrCommit) {
  auto st = nodes();
  hold(st, 5, 1);
  ASSERT_TRUE(lock_acquire(st, "/n", {30, 2}, 20).acquired);
  EXPECT_EQ(lock_release(st, "/n", {5, 1}), LockOutcome::kLost);
  NodeVersion v;
  v.data = "stale";
  EXPECT_EQ(commit_unlock(st, "/n", {5, 1}, v, 1), CommitOutcome::kLost);
  const auto rec = record(st);
  EXPECT_EQ(rec.lock_ts, 30u);
  EXPECT_NE(rec.data, "stale");
}

TEST(TimedLock, SameTimestampDifferentTokenIsNotTheHolder) {
  auto st = nodes();
  hold(st, 5, 1);
  EXPECT_EQ(lock_release(st, "/n", {5, 2}), LockOutcome::kLost);
}

TEST(CommitUnlock, AppliesVersionAppendsPendingAndUnlocks) {
  auto st = nodes();
  hold(st, 5, 1);
  NodeVersion v;
  v.data = "d";
  ASSERT_EQ(commit_unlock(st, "/n", {5, 1}, v, 7), CommitOutcome::kCommitted);
  const auto rec = record(st);
  EXPECT_TRUE(rec.exists);
  EXPECT_EQ(rec.data, "d");
  EXPECT_EQ(rec.mtxid, 7u);
  EXPECT_EQ(rec.pending_transactions, (std::vector<Txid>{7}));
  EXPECT_FALSE(rec.lock_ts);
}

TEST(CommitUnlock, TxidMustExceedPending) {
  auto st = nodes();
  hold(st, 5, 1);
  ASSERT_EQ(commit_unlock(st, "/n", {5, 1}, NodeVersion{}, 7), CommitOutcome::kCommitted);
  hold(st, 6, 2);
  EXPECT_THROW(commit_unlock(st, "/n", {6, 2}, NodeVersion{}, 7), ProtocolViolation);
}

TEST(AtomicCounter, AddsAndReads) {
  auto st = nodes();
  EXPECT_EQ(counter_value(st, "c"), 0u);
  EXPECT_EQ(counter_add(st, "c", 3), 3u);
  EXPECT_EQ(counter_add(st, "c", -1), 2u);
  EXPECT_EQ(counter_value(st, "c"), 2u);
}

TEST(AtomicList, AppendPopRemove) {
  auto st = nodes();
  list_update(st, tables::kCounters, "l", "items", ListAppendOp{{std::uint64_t{1}, std::uint64_t{2}}});
  list_update(st, tables::kCounters, "l", "items", ListPopFrontOp{});
  const auto v = list_update(st, tables::kCounters, "l", "items", ListAppendOp{{std::uint64_t{3}}});
  EXPECT_EQ(std::get<U64List>(v), (U64List{2, 3}));
  const auto w = list_update(st, tables::kCounters, "l", "items", ListRemoveOp{std::uint64_t{3}});
  EXPECT_EQ(std::get<U64List>(w), (U64List{2}));
}

TEST(LockContention, FinalValueEqualsCommits) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto r = run_lock_contention(10, 100, seed);
    EXPECT_EQ(r.final_value, r.commits) << "seed " << seed;
    EXPECT_EQ(r.commits + r.lost, 1000u);
    EXPECT_GT(r.lost, 0u) << "stale holders should have been displaced";
  }
}

TEST(LockContention, IsDeterministic) {
  const auto a = run_lock_contention(4, 30, 9);
  const auto b = run_lock_contention(4, 30, 9);
  EXPECT_EQ(a.final_value, b.final_value);
  EXPECT_EQ(a.refused, b.refused);
}

}  // namespace
}  // namespace fk
