#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fk/protocol.hpp"
#include "fk/scenario.hpp"
#include "fk/scheduler.hpp"
#include "fk/storage.hpp"

namespace fk {

template <typename Payload>
struct QueueMessage {
  std::uint64_t seqno = 0;
  Payload payload;
  SimTime enqueue_time = 0;
  std::uint32_t delivery_count = 0;
};

template <typename Payload>
struct Batch {
  std::vector<QueueMessage<Payload>> messages;
};

enum class InvocationOutcome { kCompleted, kCrashed };

/// FIFO queue bound to one function with a concurrency limit of one.
///
/// A dispatched batch stays at the head of the queue until its invocation
/// finishes. A crashed invocation gets the identical batch again; messages
/// enqueued meanwhile wait for a later batch.
template <typename Payload>
class FifoQueue {
 public:
  struct Options {
    std::string name;
    std::size_t batch_max = 10;
    SimTime delivery_latency = 1;
    SimTime retry_delay = 1;
    /// Deliveries per message before it is dead-lettered; 0 = unlimited.
    std::uint64_t retry_cap = 0;
  };

  /// Starts an invocation. The consumer must call finish() exactly once.
  using Consumer = std::function<void(const Batch<Payload>&)>;
  using MessageHook = std::function<void(const QueueMessage<Payload>&)>;

  FifoQueue(Scheduler& scheduler, Options options, Consumer consumer)
      : scheduler_(scheduler), options_(std::move(options)), consumer_(std::move(consumer)) {
    if (options_.batch_max == 0) throw std::invalid_argument("batch_max must be positive");
  }

  FifoQueue(const FifoQueue&) = delete;
  FifoQueue& operator=(const FifoQueue&) = delete;

  void on_enqueue(MessageHook hook) { on_enqueue_ = std::move(hook); }
  void on_dead_letter(MessageHook hook) { on_dead_letter_ = std::move(hook); }
  /// Consulted after each completed invocation; true redelivers the batch once
  /// more (at-least-once delivery without a crash).
  void on_completed_duplicate(std::function<bool()> oracle) { duplicate_oracle_ = std::move(oracle); }

  /// Seqno the next enqueue will receive.
  std::uint64_t next_seqno() const { return next_seqno_; }

  std::uint64_t enqueue(Payload payload) {
    QueueMessage<Payload> msg{next_seqno_++, std::move(payload), scheduler_.now(), 0};
    messages_.push_back(std::move(msg));
    if (on_enqueue_) on_enqueue_(messages_.back());
    maybe_dispatch(options_.delivery_latency);
    return messages_.back().seqno;
  }

  void finish(InvocationOutcome outcome) {
    if (!busy_) throw std::logic_error("finish() without an invocation in flight on " + options_.name);
    busy_ = false;
    if (outcome == InvocationOutcome::kCompleted) {
      if (duplicate_oracle_ && !duplicated_ && duplicate_oracle_()) {
        duplicated_ = true;
        maybe_dispatch(options_.delivery_latency);
        return;
      }
      messages_.erase(messages_.begin(), messages_.begin() + static_cast<std::ptrdiff_t>(in_flight_));
      in_flight_ = 0;
      duplicated_ = false;
      maybe_dispatch(options_.delivery_latency);
    } else {
      maybe_dispatch(options_.retry_delay);
    }
  }

  bool busy() const { return busy_; }
  std::size_t size() const { return messages_.size(); }
  bool empty() const { return messages_.empty(); }
  const Options& options() const { return options_; }
  const std::deque<QueueMessage<Payload>>& messages() const { return messages_; }

 private:
  void maybe_dispatch(SimTime delay) {
    if (busy_ || dispatch_pending_ || messages_.empty()) return;
    dispatch_pending_ = true;
    scheduler_.schedule([this] { dispatch(); }, delay);
  }

  void dispatch() {
    dispatch_pending_ = false;
    if (busy_ || messages_.empty()) return;
    if (in_flight_ == 0) in_flight_ = std::min(options_.batch_max, messages_.size());
    Batch<Payload> batch;
    for (std::size_t i = 0; i < in_flight_; ++i) {
      auto& msg = messages_[i];
      ++msg.delivery_count;
      batch.messages.push_back(msg);
    }
    if (options_.retry_cap != 0 && batch.messages.front().delivery_count > options_.retry_cap) {
      for (const auto& msg : batch.messages) {
        if (on_dead_letter_) on_dead_letter_(msg);
      }
      messages_.erase(messages_.begin(), messages_.begin() + static_cast<std::ptrdiff_t>(in_flight_));
      in_flight_ = 0;
      duplicated_ = false;
      maybe_dispatch(options_.delivery_latency);
      return;
    }
    busy_ = true;
    consumer_(batch);
  }

  Scheduler& scheduler_;
  Options options_;
  Consumer consumer_;
  MessageHook on_enqueue_;
  MessageHook on_dead_letter_;
  std::function<bool()> duplicate_oracle_;
  std::deque<QueueMessage<Payload>> messages_;
  std::uint64_t next_seqno_ = 1;
  std::size_t in_flight_ = 0;
  bool busy_ = false;
  bool dispatch_pending_ = false;
  bool duplicated_ = false;
};

struct PushResult {
  bool pushed = false;
  Txid txid = 0;
};

/// Pushes an update to the distributor queue and assigns its txid.
///
/// Atomic-push mode: the `guard` writes, the state-counter increment and the
/// enqueue happen as one step; the txid is the new counter value and nothing
/// is pushed when a guard condition fails.
/// Sequence-number mode: the txid is the queue seqno and `guard` is ignored;
/// the caller has to apply it in a separate step.
inline PushResult distributor_push(KeyValueStore& store, FifoQueue<DistributorUpdate>& queue, QueueMode mode,
                                   DistributorUpdate update, std::vector<WriteOp> guard = {}) {
  if (mode == QueueMode::kSequenceNumber) {
    assign_txid(update, queue.next_seqno());
    const auto txid = update.txid;
    queue.enqueue(std::move(update));
    return {true, txid};
  }
  guard.push_back(WriteOp{std::string(tables::kCounters), std::string(counters::kState), {},
                          {CounterAdd{std::string(fields::kValue), 1}}});
  if (!store.transact(guard).applied) return {false, 0};
  assign_txid(update, get_u64(*store.read(tables::kCounters, counters::kState), fields::kValue));
  const auto txid = update.txid;
  queue.enqueue(std::move(update));
  return {true, txid};
}

}  // namespace fk
