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

#include "fk/cloud.hpp"

#include <stdexcept>

#include "fk/functions.hpp"

namespace fk {

using nlohmann::json;

std::optional<FaultMode> FaultInjector::hit(FunctionKind kind, StepLabel label) {
  const auto n = ++arrivals_[label];
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    const auto& s = specs_[i];
    if (fired_[i] || s.target != kind || s.point != label || s.occurrence != n) continue;
    fired_[i] = true;
    return s.mode;
  }
  return std::nullopt;
}

std::size_t FaultInjector::fired() const {
  std::size_t n = 0;
  for (const bool f : fired_) n += f ? 1 : 0;
  return n;
}

std::uint64_t FaultInjector::arrivals(StepLabel label) const {
  const auto it = arrivals_.find(label);
  return it == arrivals_.end() ? 0 : it->second;
}

// ---------------------------------------------------------------------------

Invocation::Invocation(Cloud& cloud, std::uint64_t id, FunctionKind kind, std::string queue,
                       std::optional<SessionId> session, Finish finish)
    : cloud_(cloud),
      id_(id),
      kind_(kind),
      queue_(std::move(queue)),
      session_(std::move(session)),
      finish_(std::move(finish)) {}

void Invocation::start(Task<void> body, json batch) {
  cloud_.record(EventKind::kInvokeStart, session_, std::nullopt, std::nullopt,
                json{{"function", to_string(kind_)}, {"queue", queue_}, {"invocation", id_}, {"batch", std::move(batch)}});
  body_ = std::move(body);
  // Completion is handled from a separate event so the frame is never
  // destroyed while it is still running its final suspend.
  std::weak_ptr<Invocation> weak = weak_from_this();
  body_.start([this, weak] {
    cloud_.scheduler.schedule([weak] {
      if (auto self = weak.lock()) self->settle();
    });
  });
}

Invocation::Sleep Invocation::io() { return sleep(cloud_.latency(cloud_.config.storage_latency_ticks)); }
Invocation::Sleep Invocation::hop() { return sleep(cloud_.latency(cloud_.config.client_latency_ticks)); }

void Invocation::Sleep::await_suspend(std::coroutine_handle<> h) {
  auto* self = inv;
  if (self->crash_armed_) {
    auto keep = self->shared_from_this();
    self->cloud_.scheduler.schedule([keep] { keep->crash("fault", keep->armed_label_); });
    return;
  }
  std::weak_ptr<bool> alive = self->alive_;
  self->cloud_.scheduler.schedule(
      [h, alive] {
        if (const auto a = alive.lock(); a && *a) h.resume();
      },
      ticks);
}

bool Invocation::Point::await_ready() {
  const auto mode = inv->cloud_.faults.hit(inv->kind_, label);
  if (!mode) return true;
  if (*mode == FaultMode::kCrashAfter) {
    inv->crash_armed_ = true;
    inv->armed_label_ = label;
    return true;
  }
  return false;
}

void Invocation::Point::await_suspend(std::coroutine_handle<>) {
  auto keep = inv->shared_from_this();
  const auto l = label;
  inv->cloud_.scheduler.schedule([keep, l] { keep->crash("fault", l); });
}

void Invocation::crash(std::string reason, std::optional<StepLabel> label) {
  if (ended_) return;
  json payload{{"function", to_string(kind_)}, {"queue", queue_}, {"invocation", id_}, {"reason", std::move(reason)}};
  if (label) {
    payload["point"] = to_string(*label);
    payload["mode"] = crash_armed_ ? "crash-after" : "crash-before";
  }
  cloud_.record(EventKind::kInvokeCrash, session_, std::nullopt, std::nullopt, std::move(payload));
  *alive_ = false;
  body_.reset();
  end(InvocationOutcome::kCrashed);
}

void Invocation::settle() {
  if (ended_) return;
  const auto error = body_.error();
  *alive_ = false;
  body_.reset();
  if (error) {
    try {
      std::rethrow_exception(error);
    } catch (const InvocationFailed& e) {
      cloud_.record(EventKind::kInvokeCrash, session_, std::nullopt, std::nullopt,
                    json{{"function", to_string(kind_)}, {"queue", queue_}, {"invocation", id_}, {"reason", e.what()}});
      end(InvocationOutcome::kCrashed);
      return;
    }
    // Anything else is a protocol or simulator bug and aborts the run.
  }
  cloud_.record(EventKind::kInvokeComplete, session_, std::nullopt, std::nullopt,
                json{{"function", to_string(kind_)}, {"queue", queue_}, {"invocation", id_}});
  end(InvocationOutcome::kCompleted);
}

void Invocation::end(InvocationOutcome outcome) {
  ended_ = true;
  auto keep = shared_from_this();
  cloud_.forget(id_);
  if (finish_) finish_(outcome);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> table_names() {
  return {std::string(tables::kNodes), std::string(tables::kSessions), std::string(tables::kCounters),
          std::string(tables::kWatches)};
}

template <typename P>
json batch_json(const Batch<P>& batch) {
  json out = json::array();
  for (const auto& m : batch.messages) {
    out.push_back({{"seqno", m.seqno}, {"delivery", m.delivery_count}, {"payload", to_json(m.payload)}});
  }
  return out;
}

}  // namespace

Cloud::Cloud(const ScenarioConfig& cfg, Scheduler& sched, Trace& tr)
    : config(cfg),
      scheduler(sched),
      trace(tr),
      system(table_names()),
      user(cfg.regions),
      faults(cfg.faults),
      rng_(cfg.seed) {
  auto options = [&](std::string name) {
    typename FifoQueue<WriteRequest>::Options o;
    o.name = std::move(name);
    o.batch_max = config.batch_max;
    o.delivery_latency = config.queue_latency_ticks;
    o.retry_delay = config.retry_delay_ticks;
    o.retry_cap = config.retry_cap;
    return o;
  };
  for (const auto& s : config.sessions) {
    regions_[s.id] = s.region;
    auto o = options("writer:" + s.id);
    const auto id = s.id;
    auto q = std::make_unique<FifoQueue<WriteRequest>>(scheduler, o, [this, id](const Batch<WriteRequest>& b) {
      start_writer(*this, id, b);
    });
    wire_hooks(*q, o.name);
    writers_.emplace(s.id, std::move(q));
  }
  {
    const auto w = options("distributor");
    FifoQueue<DistributorUpdate>::Options o{w.name, w.batch_max, w.delivery_latency, w.retry_delay, w.retry_cap};
    distributor_ = std::make_unique<FifoQueue<DistributorUpdate>>(
        scheduler, o, [this](const Batch<DistributorUpdate>& b) { start_distributor(*this, b); });
    wire_hooks(*distributor_, o.name);
  }
  for (const auto& r : config.regions) {
    const auto w = options("watch:" + r);
    FifoQueue<WatchDelivery>::Options o{w.name, w.batch_max, w.delivery_latency, w.retry_delay, w.retry_cap};
    auto q = std::make_unique<FifoQueue<WatchDelivery>>(
        scheduler, o, [this, r](const Batch<WatchDelivery>& b) { start_watch(*this, r, b); });
    wire_hooks(*q, o.name);
    watchers_.emplace(r, std::move(q));
  }
}

Cloud::~Cloud() {
  // Destroy suspended frames before the queues and stores they reference.
  active_.clear();
}

template <typename P>
void Cloud::wire_hooks(FifoQueue<P>& q, const std::string& name) {
  q.on_enqueue([this, name](const QueueMessage<P>& m) {
    std::optional<SessionId> session;
    std::optional<Txid> txid;
    std::optional<std::string> path;
    if constexpr (std::is_same_v<P, WriteRequest>) {
      session = m.payload.session;
      path = m.payload.path;
    } else if constexpr (std::is_same_v<P, DistributorUpdate>) {
      session = m.payload.session;
      txid = m.payload.txid;
      path = m.payload.result_path;
    } else {
      txid = m.payload.txid;
      path = m.payload.path;
    }
    record(EventKind::kEnqueue, session, txid, path,
           json{{"queue", name}, {"seqno", m.seqno}, {"payload", to_json(m.payload)}});
  });
  q.on_dead_letter([this, name](const QueueMessage<P>& m) {
    record(EventKind::kDeadLetter, std::nullopt, std::nullopt, std::nullopt,
           json{{"queue", name}, {"seqno", m.seqno}, {"deliveries", m.delivery_count}, {"payload", to_json(m.payload)}});
  });
  if (config.duplicate_delivery) q.on_completed_duplicate([this] { return coin(0.25); });
}

SimTime Cloud::latency(SimTime base) {
  if (config.jitter_ticks == 0) return base;
  std::uniform_int_distribution<SimTime> d(0, config.jitter_ticks);
  return base + d(rng_);
}

bool Cloud::coin(double p) {
  std::bernoulli_distribution d(p);
  return d(rng_);
}

const TraceEvent& Cloud::record(EventKind kind, std::optional<SessionId> session, std::optional<Txid> txid,
                                std::optional<std::string> path, json payload) {
  return trace.record(now(), kind, std::move(session), txid, std::move(path), std::move(payload));
}

const RegionName& Cloud::region_of(const SessionId& session) const {
  const auto it = regions_.find(session);
  if (it == regions_.end()) throw std::out_of_range("unknown session '" + session + "'");
  return it->second;
}

FifoQueue<WriteRequest>& Cloud::writer_queue(const SessionId& session) {
  const auto it = writers_.find(session);
  if (it == writers_.end()) throw std::out_of_range("unknown session '" + session + "'");
  return *it->second;
}

FifoQueue<WatchDelivery>& Cloud::watch_queue(const RegionName& region) {
  const auto it = watchers_.find(region);
  if (it == watchers_.end()) throw std::out_of_range("unknown region '" + region + "'");
  return *it->second;
}

bool Cloud::queues_idle() const {
  if (!distributor_->empty() || distributor_->busy()) return false;
  for (const auto& [_, q] : writers_) {
    if (!q->empty() || q->busy()) return false;
  }
  for (const auto& [_, q] : watchers_) {
    if (!q->empty() || q->busy()) return false;
  }
  return true;
}

std::shared_ptr<Invocation> Cloud::invoke(FunctionKind kind, std::string queue, std::optional<SessionId> session,
                                          Invocation::Finish finish) {
  const auto id = ++next_invocation_;
  auto inv = std::make_shared<Invocation>(*this, id, kind, std::move(queue), std::move(session), std::move(finish));
  active_.emplace(id, inv);
  return inv;
}

void Cloud::respond(const SessionId& session, WriteResponse response) {
  scheduler.schedule(
      [this, session, r = std::move(response)] {
        if (deliver_response) deliver_response(session, r);
      },
      latency(config.client_latency_ticks));
}

void Cloud::start_heartbeat() {
  scheduler.schedule(
      [this] {
        if (work_pending && !work_pending()) return;
        fk::start_heartbeat(*this);
        start_heartbeat();
      },
      config.heartbeat_period_ticks);
}

// Exposed so function bodies can describe their batch in invoke-start.
json describe_batch(const Batch<WriteRequest>& b) { return batch_json(b); }
json describe_batch(const Batch<DistributorUpdate>& b) { return batch_json(b); }
json describe_batch(const Batch<WatchDelivery>& b) { return batch_json(b); }

}  // namespace fk
