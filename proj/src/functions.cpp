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

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "fk/sync.hpp"

namespace fk {

using nlohmann::json;

namespace {

std::string S(std::string_view s) { return std::string(s); }

Condition cursor_open(std::uint64_t seq) {
  return any_of({field_absent(S(fields::kDecidedThrough)), numeric_compare(S(fields::kDecidedThrough), Cmp::kLess, seq)});
}

void release_by_token(KeyValueStore& st, const std::string& path, std::uint64_t token) {
  st.conditional_update(tables::kNodes, path, {field_equals(S(fields::kLockHolder), token)},
                        {RemoveField{S(fields::kLockTs)}, RemoveField{S(fields::kLockHolder)}});
}

NodeVersion version_of(const SystemNodeRecord& r) {
  NodeVersion v;
  v.exists = r.exists;
  v.data = r.data;
  v.children = r.children;
  v.ctxid = r.ctxid;
  v.ephemeral_owner = r.ephemeral_owner;
  v.sequential_counter = r.sequential_counter;
  return v;
}

json image_json(const NodeImage& n) {
  return json{{"path", n.path},
              {"change", to_string(n.change)},
              {"exists", n.version.exists},
              {"data", base64_encode(n.version.data)},
              {"children", n.version.children}};
}

void record_commit(Cloud& c, const DistributorUpdate& u, std::string_view by) {
  json images = json::array();
  for (const auto& n : u.nodes) images.push_back(image_json(n));
  c.record(EventKind::kCommit, u.session, u.txid, u.result_path,
           json{{"by", by}, {"ticket", u.ticket}, {"req", u.request_seq}, {"op", to_string(u.op)}, {"images", images}});
}

std::vector<WriteOp> effect_ops(const std::vector<SessionEffect>& effects) {
  std::vector<WriteOp> ops;
  for (const auto& e : effects) {
    WriteOp op{S(tables::kSessions), e.session, {}, {}};
    switch (e.kind) {
      case SessionEffectKind::kAddEphemeral:
        op.mutations.push_back(ListAppend{S(fields::kEphemerals), e.path});
        break;
      case SessionEffectKind::kRemoveEphemeral:
        op.mutations.push_back(ListRemoveValue{S(fields::kEphemerals), e.path});
        break;
      case SessionEffectKind::kClose:
        op.mutations.push_back(SetField{S(fields::kStatus), S(to_string(SessionStatus::kClosed))});
        op.mutations.push_back(SetField{S(fields::kEphemerals), StrList{}});
        break;
    }
    ops.push_back(std::move(op));
  }
  return ops;
}

void insert_child(StrList& children, const std::string& name) {
  const auto it = std::lower_bound(children.begin(), children.end(), name);
  if (it == children.end() || *it != name) children.insert(it, name);
}

void erase_child(StrList& children, const std::string& name) {
  children.erase(std::remove(children.begin(), children.end(), name), children.end());
}

WriteResponse failure_response(std::uint64_t seq, const WriteRequest& req, FailureReason reason, std::string path) {
  WriteResponse r;
  r.request_seq = seq;
  r.ticket = req.ticket;
  r.op = req.op;
  r.success = false;
  r.reason = reason;
  r.path = std::move(path);
  return r;
}

// --- writer ----------------------------------------------------------------

Task<void> decide_failure(Invocation& inv, Cloud& c, std::uint64_t seq, WriteRequest req, FailureReason reason,
                          std::string target, LockHolder holder, StrList locked) {
  auto& st = c.system;
  st.conditional_update(tables::kSessions, req.session, {cursor_open(seq)},
                        {SetField{S(fields::kDecidedThrough), seq},
                         ListAppend{S(fields::kFailures), std::to_string(seq) + ":" + S(to_string(reason))},
                         SetField{S(fields::kLastHolder), holder.token}, SetField{S(fields::kLastLocked), locked}});
  co_await inv.io();
  for (const auto& p : locked) {
    lock_release(st, p, holder);
    co_await inv.io();
  }
  c.respond(req.session, failure_response(seq, req, reason, target));
}

Task<void> writer_request(Invocation& inv, Cloud& c, std::uint64_t seq, WriteRequest req) {
  auto& st = c.system;
  const auto& cfg = c.config;
  const auto sitem = st.read(tables::kSessions, req.session);
  co_await inv.io();
  const auto srec = sitem ? SessionRecord::from_item(req.session, *sitem) : SessionRecord{};

  if (seq <= srec.decided_through) {
    // Redelivered request whose outcome is already decided: clean up what a
    // crashed attempt may have left behind and resend a recorded failure.
    for (const auto& p : srec.last_locked) {
      release_by_token(st, p, srec.last_holder);
      co_await inv.io();
    }
    if (const auto reason = srec.failure_for(seq)) {
      c.respond(req.session, failure_response(seq, req, *reason, req.path));
    } else if (req.op == Opcode::kDeregister && srec.status == SessionStatus::kClosed &&
               srec.last_push_seq < seq) {
      WriteResponse r;
      r.request_seq = seq;
      r.ticket = req.ticket;
      r.op = req.op;
      r.success = true;
      r.path = req.path;
      c.respond(req.session, r);
    }
    co_return;
  }

  if (srec.status == SessionStatus::kClosed ||
      (srec.status == SessionStatus::kEvicting && req.op != Opcode::kDeregister)) {
    co_await decide_failure(inv, c, seq, req, FailureReason::kSessionClosed, req.path, LockHolder{}, {});
    co_return;
  }

  co_await inv.point(StepLabel::kBeforeLock);

  // Lock in path order; a parent always sorts before its children.
  std::vector<std::string> plan;
  switch (req.op) {
    case Opcode::kCreate:
    case Opcode::kDelete:
      plan.push_back(parent_path(req.path));
      if (req.op == Opcode::kDelete) plan.push_back(req.path);
      break;
    case Opcode::kSetData:
      plan.push_back(req.path);
      break;
    case Opcode::kDeregister: {
      std::set<std::string> paths;
      for (const auto& p : srec.owned_ephemeral_paths) {
        paths.insert(p);
        paths.insert(parent_path(p));
      }
      plan.assign(paths.begin(), paths.end());
      break;
    }
    default:
      throw ProtocolViolation("read opcode on a writer queue");
  }

  LockHolder holder;
  std::map<std::string, SystemNodeRecord> locked;
  std::string target = req.path;
  bool ok = false;
  for (std::size_t attempt = 0; attempt < cfg.writer_lock_attempts && !ok; ++attempt) {
    if (attempt > 0) co_await inv.sleep(1);
    holder = LockHolder{c.now(), c.next_token()};
    locked.clear();
    auto order = plan;
    ok = true;
    for (std::size_t i = 0; i < order.size() && ok; ++i) {
      const auto r = lock_acquire(st, order[i], holder, cfg.lock_max_hold_ticks);
      co_await inv.io();
      if (!r.acquired) {
        ok = false;
        break;
      }
      locked[order[i]] = r.old_record.value_or(SystemNodeRecord::from_item(order[i], nullptr));
      if (req.op == Opcode::kCreate && i == 0) {
        target = req.sequential ? sequential_name(req.path, locked[order[0]].sequential_counter) : req.path;
        order.push_back(target);
      }
    }
    if (!ok) {
      for (const auto& [p, _] : locked) {
        lock_release(st, p, holder);
        co_await inv.io();
      }
    }
  }
  if (!ok) throw InvocationFailed("lock-contention");

  co_await inv.point(StepLabel::kAfterLock);

  StrList locked_paths;
  for (const auto& [p, _] : locked) locked_paths.push_back(p);

  DistributorUpdate u;
  u.session = req.session;
  u.request_seq = seq;
  u.ticket = req.ticket;
  u.op = req.op;
  u.holder = holder;
  u.writer_id = "writer:" + req.session;
  u.result_path = target;

  if (req.op == Opcode::kDeregister) {
    std::map<std::string, NodeVersion> parents;
    for (const auto& p : srec.owned_ephemeral_paths) {
      const auto& rec = locked[p];
      if (!rec.exists || rec.ephemeral_owner != req.session) continue;
      NodeVersion gone;
      gone.exists = false;
      gone.sequential_counter = rec.sequential_counter;
      u.nodes.push_back(NodeImage{p, NodeChange::kDeleted, gone, rec.mtxid});
      const auto parent = parent_path(p);
      auto [it, fresh] = parents.try_emplace(parent, version_of(locked[parent]));
      erase_child(it->second.children, base_name(p));
      u.effects.push_back(SessionEffect{req.session, SessionEffectKind::kRemoveEphemeral, p});
    }
    for (auto& [p, v] : parents) u.nodes.push_back(NodeImage{p, NodeChange::kChildrenChanged, v, locked[p].mtxid});
    std::sort(u.nodes.begin(), u.nodes.end(), [](const NodeImage& a, const NodeImage& b) { return a.path < b.path; });
    u.effects.push_back(SessionEffect{req.session, SessionEffectKind::kClose, ""});
    if (u.nodes.size() == 0) {
      // Nothing to delete: close the session record directly.
      st.conditional_update(tables::kSessions, req.session, {cursor_open(seq)},
                            {SetField{S(fields::kDecidedThrough), seq},
                             SetField{S(fields::kStatus), S(to_string(SessionStatus::kClosed))},
                             SetField{S(fields::kEphemerals), StrList{}}, SetField{S(fields::kLastHolder), holder.token},
                             SetField{S(fields::kLastLocked), locked_paths}});
      co_await inv.io();
      c.record(EventKind::kSessionClosed, req.session, std::nullopt, std::nullopt, json{{"by", "writer"}});
      for (const auto& p : locked_paths) {
        lock_release(st, p, holder);
        co_await inv.io();
      }
      WriteResponse r;
      r.request_seq = seq;
      r.ticket = req.ticket;
      r.op = req.op;
      r.success = true;
      r.path = req.path;
      c.respond(req.session, r);
      co_return;
    }
  } else {
    const auto& old = locked[target];
    const auto parent = parent_path(target);
    const SystemNodeRecord parent_rec = locked.contains(parent) && parent != target ? locked[parent] : SystemNodeRecord{};
    if (const auto reason = is_valid(req, old, parent_rec)) {
      co_await decide_failure(inv, c, seq, req, *reason, target, holder, locked_paths);
      co_return;
    }
    switch (req.op) {
      case Opcode::kCreate: {
        NodeVersion v;
        v.exists = true;
        v.data = req.data;
        if (req.ephemeral) v.ephemeral_owner = req.session;
        v.sequential_counter = old.sequential_counter;
        u.nodes.push_back(NodeImage{target, NodeChange::kCreated, v, old.mtxid});
        auto pv = version_of(parent_rec);
        insert_child(pv.children, base_name(target));
        if (req.sequential) ++pv.sequential_counter;
        u.nodes.insert(u.nodes.begin(), NodeImage{parent, NodeChange::kChildrenChanged, pv, parent_rec.mtxid});
        if (req.ephemeral) u.effects.push_back(SessionEffect{req.session, SessionEffectKind::kAddEphemeral, target});
        break;
      }
      case Opcode::kSetData: {
        auto v = version_of(old);
        v.data = req.data;
        u.nodes.push_back(NodeImage{target, NodeChange::kDataChanged, v, old.mtxid});
        break;
      }
      case Opcode::kDelete: {
        NodeVersion v;
        v.exists = false;
        v.sequential_counter = old.sequential_counter;
        auto pv = version_of(parent_rec);
        erase_child(pv.children, base_name(target));
        u.nodes.push_back(NodeImage{parent, NodeChange::kChildrenChanged, pv, parent_rec.mtxid});
        u.nodes.push_back(NodeImage{target, NodeChange::kDeleted, v, old.mtxid});
        if (old.ephemeral_owner) {
          u.effects.push_back(SessionEffect{*old.ephemeral_owner, SessionEffectKind::kRemoveEphemeral, target});
        }
        break;
      }
      default:
        break;
    }
  }

  co_await inv.point(StepLabel::kBeforePush);

  const bool atomic = cfg.queue_mode == QueueMode::kAtomicPush;
  PushResult pushed;
  if (atomic) {
    WriteOp cursor{S(tables::kSessions), req.session, {cursor_open(seq)},
                   {SetField{S(fields::kDecidedThrough), seq}, SetField{S(fields::kLastPushSeq), seq},
                    SetField{S(fields::kLastHolder), holder.token}, SetField{S(fields::kLastLocked), locked_paths}}};
    pushed = distributor_push(st, c.distributor_queue(), cfg.queue_mode, u, {cursor});
    if (!pushed.pushed) throw ProtocolViolation("writer cursor moved under a single-instance queue");
    co_await inv.io();
  } else {
    pushed = distributor_push(st, c.distributor_queue(), cfg.queue_mode, u);
    co_await inv.io();
    co_await inv.point(StepLabel::kBetweenPushAndCommit);
  }
  assign_txid(u, pushed.txid);

  std::vector<WriteOp> ops;
  for (const auto& n : u.nodes) {
    if (const auto cur = st.read(tables::kNodes, n.path)) {
      for (const auto p : get_u64_list(*cur, fields::kPending)) {
        if (p >= u.txid) throw ProtocolViolation("commit txid does not exceed pending transactions of " + n.path);
      }
    }
    ops.push_back(WriteOp{S(tables::kNodes), n.path, lock_held_by(holder), commit_mutations(n.version, u.txid)});
  }
  for (auto& op : effect_ops(u.effects)) ops.push_back(std::move(op));
  WriteOp cursor{S(tables::kSessions), req.session, {cursor_open(seq)},
                 {SetField{S(fields::kDecidedThrough), seq}, SetField{S(fields::kLastPushSeq), seq},
                  SetField{S(fields::kLastHolder), holder.token}, SetField{S(fields::kLastLocked), locked_paths}}};
  if (!atomic) ops.push_back(cursor);
  const auto committed = st.transact(ops);
  if (committed.applied) {
    record_commit(c, u, "writer");
    if (req.op == Opcode::kDeregister) c.record(EventKind::kSessionClosed, req.session, u.txid, std::nullopt, json{{"by", "writer"}});
  } else if (!atomic) {
    // The distributor committed on our behalf; the request is still decided.
    st.conditional_update(tables::kSessions, req.session, cursor.conditions, cursor.mutations);
  }
  co_await inv.io();

  co_await inv.point(StepLabel::kAfterCommitBeforeUnlock);

  for (const auto& p : locked_paths) {
    lock_release(st, p, holder);
    co_await inv.io();
  }
}

Task<void> writer_main(Invocation& inv, Cloud& c, std::vector<QueueMessage<WriteRequest>> messages) {
  for (const auto& m : messages) co_await writer_request(inv, c, m.seqno, m.payload);
}

// --- distributor -----------------------------------------------------------

bool head_is(KeyValueStore& st, const std::string& path, Txid txid) {
  const auto item = st.read(tables::kNodes, path);
  if (!item) return false;
  const auto pending = get_u64_list(*item, fields::kPending);
  return !pending.empty() && pending.front() == txid;
}

struct Fired {
  WatchRecord watch;
  WatchEvent event;
};

Task<void> distributor_update(Invocation& inv, Cloud& c, DistributorUpdate u) {
  auto& st = c.system;
  const auto& cfg = c.config;
  const auto cursor = counter_value(st, counters::kDistributed);
  co_await inv.io();
  if (u.txid <= cursor) co_return;

  co_await inv.point(StepLabel::kBeforeTryCommit);

  const auto head = st.read(tables::kNodes, u.nodes.front().path);
  const auto pending = head ? get_u64_list(*head, fields::kPending) : U64List{};
  co_await inv.io();
  bool rejected = false;
  if (pending.empty() || pending.front() != u.txid) {
    // The writer never committed: try to finish the commit for it.
    const auto now = c.now();
    std::vector<WriteOp> ops;
    for (const auto& n : u.nodes) {
      std::vector<Condition> lock_ok{field_absent(S(fields::kLockTs)), field_equals(S(fields::kLockHolder), u.holder.token)};
      if (now > cfg.lock_max_hold_ticks) {
        lock_ok.push_back(numeric_compare(S(fields::kLockTs), Cmp::kLess, now - cfg.lock_max_hold_ticks));
      }
      Condition base = n.base_mtxid == 0
                           ? any_of({field_absent(S(fields::kMtxid)), field_equals(S(fields::kMtxid), std::uint64_t{0})})
                           : field_equals(S(fields::kMtxid), n.base_mtxid);
      auto mutations = commit_mutations(n.version, u.txid);
      mutations.push_back(RemoveField{S(fields::kLockTs)});
      mutations.push_back(RemoveField{S(fields::kLockHolder)});
      ops.push_back(WriteOp{S(tables::kNodes), n.path, {base, any_of(std::move(lock_ok))}, std::move(mutations)});
    }
    for (auto& op : effect_ops(u.effects)) ops.push_back(std::move(op));
    const auto tried = st.transact(ops);
    if (tried.applied) {
      record_commit(c, u, "distributor");
      if (u.op == Opcode::kDeregister) {
        c.record(EventKind::kSessionClosed, u.session, u.txid, std::nullopt, json{{"by", "distributor"}});
      }
    } else if (head_is(st, u.nodes.front().path, u.txid)) {
      // The writer's own commit landed between the head check and TryCommit.
    } else {
      bool live_other = false;
      for (const auto& n : u.nodes) {
        const auto item = st.read(tables::kNodes, n.path);
        const auto rec = SystemNodeRecord::from_item(n.path, item ? &*item : nullptr);
        if (rec.lock_ts && rec.lock_holder != u.holder.token &&
            !(now > cfg.lock_max_hold_ticks && *rec.lock_ts < now - cfg.lock_max_hold_ticks)) {
          live_other = true;
        }
      }
      if (live_other) throw InvocationFailed("deferred: node locked by a live writer");
      rejected = true;
    }
    co_await inv.io();
  }

  co_await inv.point(StepLabel::kAfterTryCommit);

  if (rejected) {
    WriteResponse r;
    r.request_seq = u.request_seq;
    r.ticket = u.ticket;
    r.op = u.op;
    r.success = false;
    r.reason = FailureReason::kCommitRejected;
    r.path = u.result_path;
    c.respond(u.session, r);
    st.conditional_update(tables::kCounters, counters::kDistributed, {}, {SetField{S(fields::kValue), u.txid}});
    co_await inv.io();
    co_return;
  }

  // Mark the watches this transaction fires; a marked watch takes no new subscribers.
  std::vector<Fired> fired;
  const auto watches = st.scan(tables::kWatches);
  for (const auto& n : u.nodes) {
    for (const auto kind : fired_kinds(n.change)) {
      for (const auto& [key, item] : watches) {
        const auto w = WatchRecord::from_item(std::stoull(key), item);
        if (w.path != n.path || w.kind != kind) continue;
        if (w.fired_txid && *w.fired_txid != u.txid) continue;
        const auto r = st.conditional_update(
            tables::kWatches, key,
            {any_of({field_absent(S(fields::kFiredTxid)), field_equals(S(fields::kFiredTxid), u.txid)})},
            {SetField{S(fields::kFiredTxid), u.txid}});
        if (r.applied) fired.push_back(Fired{WatchRecord::from_item(w.id, *r.current), watch_event_for(n.change)});
      }
    }
  }
  co_await inv.io();

  for (const auto& region : cfg.regions) {
    const auto snapshot = epoch_watch_ids(read_epoch(st, region));
    co_await inv.io();
    for (const auto& n : u.nodes) {
      if (n.version.exists) {
        c.user.put(region, DataNodeObject{n.path, n.version.data, n.version.children, n.version.ctxid, u.txid, snapshot});
      } else {
        c.user.remove(region, n.path);
      }
      c.record(EventKind::kStorageWrite, u.session, u.txid, n.path,
               json{{"region", region}, {"op", n.version.exists ? "put" : "remove"}, {"epoch", snapshot}});
      co_await inv.io();
    }
    co_await inv.point(StepLabel::kAfterDataUpdate);

    std::vector<WatchDelivery> deliveries;
    for (const auto& f : fired) {
      std::vector<SessionId> subs;
      for (const auto& s : f.watch.subscribers) {
        if (c.region_of(s) == region) subs.push_back(s);
      }
      if (subs.empty()) continue;
      deliveries.push_back(WatchDelivery{f.watch.id, u.txid, f.watch.path, f.event, region, subs, u.txid});
    }
    if (!deliveries.empty()) {
      std::vector<Mutation> adds;
      for (const auto& d : deliveries) adds.push_back(ListAppend{S(fields::kEntries), EpochEntry{d.watch, d.token}.encode()});
      st.conditional_update(tables::kCounters, counters::epoch_key(region), {}, adds);
      for (auto& d : deliveries) c.watch_queue(region).enqueue(std::move(d));
      co_await inv.io();
    }
    co_await inv.point(StepLabel::kAfterInvokeWatch);
  }

  WriteResponse r;
  r.request_seq = u.request_seq;
  r.ticket = u.ticket;
  r.op = u.op;
  r.success = true;
  r.txid = u.txid;
  r.path = u.result_path;
  r.epoch_snapshot = epoch_watch_ids(read_epoch(st, c.region_of(u.session)));
  c.respond(u.session, r);
  co_await inv.io();

  co_await inv.point(StepLabel::kBeforePopTransaction);

  std::vector<WriteOp> pop;
  for (const auto& n : u.nodes) {
    pop.push_back(WriteOp{S(tables::kNodes), n.path, {list_head_equals(S(fields::kPending), u.txid)},
                          {ListPopFront{S(fields::kPending)}}});
  }
  pop.push_back(WriteOp{S(tables::kCounters), S(counters::kDistributed), {}, {SetField{S(fields::kValue), u.txid}}});
  for (const auto& f : fired) pop.push_back(WriteOp{S(tables::kWatches), watch_key(f.watch.id), {}, {DeleteItem{}}});
  if (!st.transact(pop).applied) throw ProtocolViolation("pending head of txid " + std::to_string(u.txid) + " moved before pop");
  co_await inv.io();
}

Task<void> distributor_main(Invocation& inv, Cloud& c, std::vector<QueueMessage<DistributorUpdate>> messages) {
  for (const auto& m : messages) co_await distributor_update(inv, c, m.payload);
}

// --- watch -----------------------------------------------------------------

Task<void> watch_main(Invocation& inv, Cloud& c, std::vector<QueueMessage<WatchDelivery>> messages) {
  auto& st = c.system;
  for (const auto& m : messages) {
    const auto& d = m.payload;
    co_await inv.point(StepLabel::kBeforeDeliver);
    for (const auto& sub : d.subscribers) {
      co_await inv.hop();
      c.record(EventKind::kNotifySent, sub, d.txid, d.path,
               json{{"watch", d.watch}, {"event", to_string(d.event)}, {"region", d.region}});
      if (c.deliver_notification) c.deliver_notification(sub, Notification{d.watch, d.txid, d.path, d.event});
      co_await inv.hop();
    }
    co_await inv.point(StepLabel::kAfterDeliver);
    st.conditional_update(tables::kCounters, counters::epoch_key(d.region), {},
                          {ListRemoveValue{S(fields::kEntries), EpochEntry{d.watch, d.token}.encode()}});
    co_await inv.io();
  }
}

// --- heartbeat -------------------------------------------------------------

Task<void> heartbeat_main(Invocation& inv, Cloud& c) {
  auto& st = c.system;
  const auto sessions = st.scan(tables::kSessions);
  co_await inv.io();
  for (const auto& [id, item] : sessions) {
    const auto rec = SessionRecord::from_item(id, item);
    if (rec.status != SessionStatus::kActive || rec.owned_ephemeral_paths.empty()) continue;
    co_await inv.point(StepLabel::kBeforePing);
    co_await inv.hop();
    const bool alive = !c.answers_ping || c.answers_ping(id);
    co_await inv.hop();
    co_await inv.point(StepLabel::kAfterPing);
    if (alive) continue;
    const auto r = st.conditional_update(tables::kSessions, id,
                                         {field_equals(S(fields::kStatus), S(to_string(SessionStatus::kActive)))},
                                         {SetField{S(fields::kStatus), S(to_string(SessionStatus::kEvicting))}});
    if (r.applied) {
      WriteRequest dereg;
      dereg.session = id;
      dereg.op = Opcode::kDeregister;
      dereg.path = "/";
      c.writer_queue(id).enqueue(dereg);
      c.record(EventKind::kSessionEvicted, id, std::nullopt, std::nullopt,
               json{{"ephemerals", rec.owned_ephemeral_paths}});
    }
    co_await inv.io();
  }
}

}  // namespace

std::optional<FailureReason> is_valid(const WriteRequest& req, const SystemNodeRecord& old,
                                      const SystemNodeRecord& parent) {
  switch (req.op) {
    case Opcode::kCreate:
      if (!parent.exists) return FailureReason::kNoParent;
      if (parent.ephemeral_owner) return FailureReason::kNoChildrenForEphemerals;
      if (old.exists) return FailureReason::kNodeExists;
      return std::nullopt;
    case Opcode::kSetData:
      if (!old.exists) return FailureReason::kNoNode;
      if (req.version && *req.version != old.mtxid) return FailureReason::kBadVersion;
      return std::nullopt;
    case Opcode::kDelete:
      if (!old.exists) return FailureReason::kNoNode;
      if (req.version && *req.version != old.mtxid) return FailureReason::kBadVersion;
      if (!old.children.empty()) return FailureReason::kNotEmpty;
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

std::vector<WatchKind> fired_kinds(NodeChange change) {
  switch (change) {
    case NodeChange::kCreated:
      return {WatchKind::kExists};
    case NodeChange::kDataChanged:
      return {WatchKind::kData, WatchKind::kExists};
    case NodeChange::kDeleted:
      return {WatchKind::kData, WatchKind::kExists, WatchKind::kChildren};
    case NodeChange::kChildrenChanged:
      return {WatchKind::kChildren};
  }
  return {};
}

WatchEvent watch_event_for(NodeChange change) {
  switch (change) {
    case NodeChange::kCreated:
      return WatchEvent::kNodeCreated;
    case NodeChange::kDataChanged:
      return WatchEvent::kDataChanged;
    case NodeChange::kDeleted:
      return WatchEvent::kNodeDeleted;
    case NodeChange::kChildrenChanged:
      return WatchEvent::kChildrenChanged;
  }
  return WatchEvent::kDataChanged;
}

std::string sequential_name(std::string_view prefix, std::uint64_t counter) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%010llu", static_cast<unsigned long long>(counter));
  return std::string(prefix) + buf;
}

WatchId register_watch(KeyValueStore& st, std::string_view path, WatchKind kind, const SessionId& session) {
  for (const auto& [key, item] : st.scan(tables::kWatches)) {
    const auto w = WatchRecord::from_item(std::stoull(key), item);
    if (w.path != path || w.kind != kind || w.fired_txid) continue;
    if (std::find(w.subscribers.begin(), w.subscribers.end(), session) != w.subscribers.end()) return w.id;
    const auto r = st.conditional_update(tables::kWatches, key, {field_absent(S(fields::kFiredTxid))},
                                         {ListAppend{S(fields::kSubscribers), session}});
    if (r.applied) return w.id;
  }
  const auto id = counter_add(st, counters::kWatchIds, 1);
  st.conditional_update(tables::kWatches, watch_key(id), {field_absent(S(fields::kPath))},
                        {SetField{S(fields::kPath), S(path)}, SetField{S(fields::kKind), S(to_string(kind))},
                         SetField{S(fields::kSubscribers), StrList{session}}});
  return id;
}

void start_writer(Cloud& c, const SessionId& session, const Batch<WriteRequest>& batch) {
  auto& q = c.writer_queue(session);
  auto inv = c.invoke(FunctionKind::kWriter, q.options().name, session, [&q](InvocationOutcome o) { q.finish(o); });
  inv->start(writer_main(*inv, c, batch.messages), describe_batch(batch));
}

void start_distributor(Cloud& c, const Batch<DistributorUpdate>& batch) {
  auto& q = c.distributor_queue();
  auto inv = c.invoke(FunctionKind::kDistributor, q.options().name, std::nullopt, [&q](InvocationOutcome o) { q.finish(o); });
  inv->start(distributor_main(*inv, c, batch.messages), describe_batch(batch));
}

void start_watch(Cloud& c, const RegionName& region, const Batch<WatchDelivery>& batch) {
  auto& q = c.watch_queue(region);
  auto inv = c.invoke(FunctionKind::kWatch, q.options().name, std::nullopt, [&q](InvocationOutcome o) { q.finish(o); });
  inv->start(watch_main(*inv, c, batch.messages), describe_batch(batch));
}

void start_heartbeat(Cloud& c) {
  auto inv = c.invoke(FunctionKind::kHeartbeat, "heartbeat", std::nullopt, nullptr);
  inv->start(heartbeat_main(*inv, c), json::array());
}

}  // namespace fk
