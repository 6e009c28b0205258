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

#include "fk/queueing.hpp"

#include <gtest/gtest.h>

namespace fk {
namespace {

struct Harness {
  Scheduler scheduler;
  std::vector<std::vector<std::uint64_t>> batches;
  std::vector<InvocationOutcome> script;  // outcome of each invocation, completed when exhausted
  std::unique_ptr<FifoQueue<int>> queue;

  explicit Harness(std::size_t batch_max, std::uint64_t retry_cap = 0) {
    FifoQueue<int>::Options o;
    o.name = "q";
    o.batch_max = batch_max;
    o.retry_cap = retry_cap;
    queue = std::make_unique<FifoQueue<int>>(scheduler, o, [this](const Batch<int>& b) {
      std::vector<std::uint64_t> seqnos;
      for (const auto& m : b.messages) seqnos.push_back(m.seqno);
      batches.push_back(seqnos);
      const auto outcome = batches.size() <= script.size() ? script[batches.size() - 1] : InvocationOutcome::kCompleted;
      scheduler.schedule([this, outcome] { queue->finish(outcome); }, 2);
    });
  }
};

TEST(FifoQueue, SeqnosIncreaseAndBatchesRespectTheLimit) {
  Harness h(2);
  for (int i = 0; i < 5; ++i) h.queue->enqueue(i);
  h.scheduler.run();
  EXPECT_EQ(h.batches, (std::vector<std::vector<std::uint64_t>>{{1, 2}, {3, 4}, {5}}));
  EXPECT_TRUE(h.queue->empty());
}

TEST(FifoQueue, CrashedBatchIsRedeliveredIdentically) {
  Harness h(3);
  h.script = {InvocationOutcome::kCrashed};
  h.queue->enqueue(1);
  h.queue->enqueue(2);
  h.scheduler.schedule([&] { h.queue->enqueue(3); }, 2);  // arrives while the first batch is in flight
  h.scheduler.run();
  ASSERT_GE(h.batches.size(), 2u);
  EXPECT_EQ(h.batches[0], h.batches[1]);
  EXPECT_EQ(h.batches.back(), (std::vector<std::uint64_t>{3}));
}

TEST(FifoQueue, OneInvocationAtATime) {
  Harness h(1);
  bool overlap = false;
  for (int i = 0; i < 4; ++i) h.queue->enqueue(i);
  for (SimTime t = 0; t < 20; ++t) {
    h.scheduler.schedule([&] { overlap = overlap || h.batches.size() > 1 + h.scheduler.now() / 2; }, t);
  }
  h.scheduler.run();
  EXPECT_FALSE(overlap);
  EXPECT_EQ(h.batches.size(), 4u);
}

TEST(FifoQueue, DeadLetterAfterRetryCap) {
  Harness h(1, 2);
  h.script = {InvocationOutcome::kCrashed, InvocationOutcome::kCrashed};
  std::vector<std::uint64_t> dead;
  h.queue->on_dead_letter([&](const QueueMessage<int>& m) { dead.push_back(m.seqno); });
  h.queue->enqueue(1);
  h.queue->enqueue(2);
  h.scheduler.run();
  EXPECT_EQ(dead, (std::vector<std::uint64_t>{1}));
  EXPECT_EQ(h.batches.back(), (std::vector<std::uint64_t>{2}));
}

TEST(FifoQueue, CompletedBatchCanBeDuplicated) {
  Harness h(2);
  bool once = true;
  h.queue->on_completed_duplicate([&] { return std::exchange(once, false); });
  h.queue->enqueue(1);
  h.scheduler.run();
  EXPECT_EQ(h.batches, (std::vector<std::vector<std::uint64_t>>{{1}, {1}}));
}

TEST(FifoQueue, FinishWithoutInvocationIsAnError) {
  Harness h(1);
  EXPECT_THROW(h.queue->finish(InvocationOutcome::kCompleted), std::logic_error);
}

struct PushHarness {
  Scheduler scheduler;
  KeyValueStore store{{std::string(tables::kCounters), std::string(tables::kSessions)}};
  FifoQueue<DistributorUpdate> queue{scheduler, {"distributor"}, [](const Batch<DistributorUpdate>&) {}};
};

DistributorUpdate created(const std::string& path) {
  DistributorUpdate u;
  u.nodes.push_back(NodeImage{path, NodeChange::kCreated, NodeVersion{}, 0});
  return u;
}

TEST(DistributorPush, AtomicModeTxidIsTheStateCounter) {
  PushHarness h;
  const auto a = distributor_push(h.store, h.queue, QueueMode::kAtomicPush, created("/a"));
  const auto b = distributor_push(h.store, h.queue, QueueMode::kAtomicPush, created("/b"));
  EXPECT_EQ(a.txid, 1u);
  EXPECT_EQ(b.txid, 2u);
  ASSERT_EQ(h.queue.size(), 2u);
  EXPECT_EQ(h.queue.messages()[1].payload.txid, 2u);
  EXPECT_EQ(h.queue.messages()[1].payload.nodes[0].version.ctxid, 2u);
}

TEST(DistributorPush, AtomicModeFailedGuardPushesNothing) {
  PushHarness h;
  const WriteOp guard{std::string(tables::kSessions), "s1", {field_equals("v", std::uint64_t{1})}, {}};
  const auto r = distributor_push(h.store, h.queue, QueueMode::kAtomicPush, created("/a"), {guard});
  EXPECT_FALSE(r.pushed);
  EXPECT_TRUE(h.queue.empty());
  EXPECT_EQ(counter_value(h.store, counters::kState), 0u);
}

TEST(DistributorPush, SequenceModeTxidIsTheSeqno) {
  PushHarness h;
  const auto a = distributor_push(h.store, h.queue, QueueMode::kSequenceNumber, created("/a"));
  const auto b = distributor_push(h.store, h.queue, QueueMode::kSequenceNumber, created("/b"));
  EXPECT_EQ(a.txid, h.queue.messages()[0].seqno);
  EXPECT_LT(a.txid, b.txid);
}

}  // namespace
}  // namespace fk
