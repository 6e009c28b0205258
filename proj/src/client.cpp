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

#include "fk/client.hpp"

#include <algorithm>

#include "fk/functions.hpp"

namespace fk {

using nlohmann::json;

namespace {

struct Delay {
  Scheduler& scheduler;
  SimTime ticks;
  bool await_ready() const noexcept { return false; }
  void await_suspend(std::coroutine_handle<> h) {
    scheduler.schedule([h] { h.resume(); }, ticks);
  }
  void await_resume() const noexcept {}
};

WatchKind watch_kind_for(Opcode op) {
  switch (op) {
    case Opcode::kExists:
      return WatchKind::kExists;
    case Opcode::kGetChildren:
      return WatchKind::kChildren;
    default:
      return WatchKind::kData;
  }
}

}  // namespace

ClientSession::ClientSession(Cloud& cloud, SessionSpec spec, std::vector<WorkloadOp> ops,
                             std::optional<std::size_t> unresponsive_after)
    : cloud_(cloud), spec_(std::move(spec)), ops_(std::move(ops)), unresponsive_after_(unresponsive_after) {}

void ClientSession::start(SimTime delay) {
  cloud_.scheduler.schedule([this] { tick(); }, delay);
}

bool ClientSession::quiescent() const {
  const bool done_submitting = silent_ || close_submitted_;
  return done_submitting && pending_.empty() && !read_in_flight_;
}

void ClientSession::resume_submission() {
  if (!waiting_) return;
  waiting_ = false;
  cloud_.scheduler.schedule([this] { tick(); });
}

void ClientSession::tick() {
  if (silent_ || close_submitted_) return;
  if (unresponsive_after_ && submitted_ >= *unresponsive_after_) {
    silent_ = true;
    return;
  }
  // Reads are barriers: nothing passes an unfinished read, and a read waits
  // for every earlier result.
  if (read_in_flight_) {
    waiting_ = true;
    return;
  }
  if (next_ >= ops_.size()) {
    WorkloadOp close;
    close.session = spec_.id;
    close.op = Opcode::kDeregister;
    close.path = "/";
    close_submitted_ = true;
    submit(close);
    return;
  }
  const auto& op = ops_[next_];
  if (!is_write(op.op) && !pending_.empty()) {
    waiting_ = true;
    return;
  }
  ++next_;
  ++submitted_;
  submit(op);
  cloud_.scheduler.schedule([this] { tick(); }, cloud_.config.op_interval_ticks);
}

void ClientSession::submit(const WorkloadOp& op) {
  Pending p;
  p.ticket = ++next_ticket_;
  p.op = op;
  p.is_read = !is_write(op.op);
  const auto ticket = p.ticket;
  cloud_.record(EventKind::kEnqueue, spec_.id, std::nullopt, op.path,
                json{{"queue", "client:" + spec_.id}, {"ticket", ticket}, {"op", to_string(op.op)}, {"watch", op.watch}});
  if (closed_) {
    p.resolved = true;
    p.local_failure = FailureReason::kSessionClosed;
    pending_.emplace(ticket, std::move(p));
    try_deliver();
    return;
  }
  pending_.emplace(ticket, std::move(p));
  if (!is_write(op.op)) {
    read_in_flight_ = true;
    tasks_.push_back(read(ticket));
    tasks_.back().start(nullptr);
    return;
  }
  WriteRequest req;
  req.session = spec_.id;
  req.ticket = ticket;
  req.op = op.op;
  req.path = op.path;
  req.data = op.data;
  req.version = op.version;
  req.ephemeral = op.ephemeral;
  req.sequential = op.sequential;
  // The session's channel to its queue is FIFO: jitter never reorders requests.
  const auto now = cloud_.scheduler.now();
  last_send_at_ = std::max(last_send_at_, now + cloud_.latency(cloud_.config.client_latency_ticks));
  cloud_.scheduler.schedule([this, req] { cloud_.writer_queue(spec_.id).enqueue(req); }, last_send_at_ - now);
}

Task<void> ClientSession::read(std::uint64_t ticket) {
  const auto op = pending_.at(ticket).op;
  auto& st = cloud_.system;
  const auto storage = [this] { return Delay{cloud_.scheduler, cloud_.latency(cloud_.config.storage_latency_ticks)}; };

  std::optional<Txid> registered_at;
  if (op.watch) {
    const auto w = register_watch(st, op.path, watch_kind_for(op.op), spec_.id);
    const auto node = st.read(tables::kNodes, op.path);
    registered_at = node ? get_u64(*node, fields::kMtxid) : 0;
    awaiting_.insert(w);
    cloud_.record(EventKind::kStorageWrite, spec_.id, std::nullopt, op.path,
                  json{{"op", "register-watch"}, {"watch", w}, {"kind", to_string(watch_kind_for(op.op))}, {"ticket", ticket}});
    co_await storage();
  }
  auto fetch = [&](int attempt) {
    auto obj = cloud_.user.get(spec_.region, op.path);
    cloud_.record(EventKind::kStorageRead, spec_.id, obj ? std::optional<Txid>(obj->mtxid) : std::nullopt, op.path,
                  json{{"ticket", ticket}, {"region", spec_.region}, {"exists", obj.has_value()}, {"fetch", attempt}});
    return obj;
  };
  auto obj = fetch(1);
  co_await storage();
  if (registered_at && obj && obj->mtxid > *registered_at) {
    obj = fetch(2);
    co_await storage();
  }
  auto& p = pending_.at(ticket);
  p.object = std::move(obj);
  p.resolved = true;
  arm_timeout(ticket);
  try_deliver();
}

void ClientSession::arm_timeout(std::uint64_t ticket) {
  cloud_.scheduler.schedule(
      [this, ticket] {
        const auto it = pending_.find(ticket);
        if (it == pending_.end()) return;
        it->second.timed_out = true;
        try_deliver();
      },
      cloud_.config.stall_timeout());
}

void ClientSession::on_response(const WriteResponse& r) {
  if (r.ticket == 0) {
    // Deregistration issued by the heartbeat.
    if (r.success) closed_ = true;
    return;
  }
  const auto it = pending_.find(r.ticket);
  if (it == pending_.end() || it->second.resolved) return;  // duplicate
  it->second.response = r;
  it->second.resolved = true;
  if (r.success && r.op == Opcode::kDeregister) closed_ = true;
  if (r.success && blocked_by_watches(r.epoch_snapshot)) arm_timeout(r.ticket);
  try_deliver();
}

void ClientSession::on_notification(const Notification& n) {
  const bool duplicate = notification_log_.contains({n.watch, n.txid});
  cloud_.record(EventKind::kNotifyReceived, spec_.id, n.txid, n.path,
                json{{"watch", n.watch}, {"event", to_string(n.event)}, {"duplicate", duplicate}});
  if (duplicate) return;
  notification_log_.insert({n.watch, n.txid});
  awaiting_.erase(n.watch);
  notifications_.push_back(n);
  mrd_ = std::max(mrd_, n.txid);
  try_deliver();
}

bool ClientSession::blocked_by_watches(const std::vector<WatchId>& snapshot) const {
  return std::any_of(snapshot.begin(), snapshot.end(), [&](WatchId w) { return awaiting_.contains(w); });
}

void ClientSession::try_deliver() {
  while (!pending_.empty()) {
    auto& p = pending_.begin()->second;
    if (!p.resolved) return;
    if (!p.local_failure) {
      if (p.is_read) {
        if (p.object && p.object->mtxid >= mrd_ && blocked_by_watches(p.object->epoch_snapshot) && !p.timed_out) return;
      } else if (p.response->success && blocked_by_watches(p.response->epoch_snapshot) && !p.timed_out) {
        return;
      }
    }
    deliver(p);
    pending_.erase(pending_.begin());
  }
  resume_submission();
}

void ClientSession::deliver(Pending& p) {
  OpResult r;
  r.ticket = p.ticket;
  r.op = p.op.op;
  r.path = p.op.path;
  r.result_path = p.op.path;
  if (p.local_failure) {
    r.reason = p.local_failure;
    r.local = true;
  } else if (p.is_read) {
    read_in_flight_ = false;
    const auto& obj = p.object;
    const bool stalled = obj && obj->mtxid >= mrd_ && blocked_by_watches(obj->epoch_snapshot);
    if (stalled) {
      r.reason = FailureReason::kStalled;
    } else {
      r.exists = obj.has_value();
      if (obj) {
        r.data = obj->data;
        r.children = obj->children;
        r.version = obj->mtxid;
        mrd_ = std::max(mrd_, obj->mtxid);
      }
      r.success = obj.has_value() || p.op.op == Opcode::kExists;
      if (!r.success) r.reason = FailureReason::kNoNode;
      cloud_.record(EventKind::kClientReadObserve, spec_.id, obj ? std::optional<Txid>(obj->mtxid) : std::nullopt,
                    p.op.path,
                    json{{"ticket", p.ticket},
                         {"op", to_string(p.op.op)},
                         {"exists", r.exists},
                         {"data", base64_encode(r.data)},
                         {"children", r.children}});
    }
  } else {
    const auto& resp = *p.response;
    r.success = resp.success;
    r.reason = resp.reason;
    r.txid = resp.txid;
    r.result_path = resp.path;
    if (resp.success && resp.txid) mrd_ = std::max(mrd_, *resp.txid);
  }
  json payload{{"ticket", r.ticket}, {"op", to_string(r.op)}, {"success", r.success}, {"mrd", mrd_}};
  if (r.reason) payload["reason"] = to_string(*r.reason);
  if (r.local) payload["local"] = true;
  if (r.result_path != r.path) payload["result_path"] = r.result_path;
  cloud_.record(EventKind::kClientResult, spec_.id, r.txid, r.path, std::move(payload));
  results_.push_back(std::move(r));
}

}  // namespace fk
