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

#include "fk/simulator.hpp"

#include <memory>

#include "fk/cloud.hpp"

namespace fk {

using nlohmann::json;

namespace {

std::string S(std::string_view s) { return std::string(s); }

void seed_stores(Cloud& cloud) {
  cloud.system.conditional_update(tables::kNodes, "/", {},
                                  {SetField{S(fields::kExists), std::uint64_t{1}}, SetField{S(fields::kData), S("")},
                                   SetField{S(fields::kChildren), StrList{}}, SetField{S(fields::kCtxid), std::uint64_t{0}},
                                   SetField{S(fields::kMtxid), std::uint64_t{0}}});
  for (const auto& r : cloud.config.regions) cloud.user.put(r, DataNodeObject{"/", "", {}, 0, 0, {}});
  for (const auto& s : cloud.config.sessions) {
    cloud.system.conditional_update(tables::kSessions, s.id, {},
                                    {SetField{S(fields::kStatus), S(to_string(SessionStatus::kActive))},
                                     SetField{S(fields::kRegion), s.region}});
    cloud.record(EventKind::kSessionOpen, s.id, std::nullopt, std::nullopt, json{{"region", s.region}});
  }
}

void record_final_state(Cloud& cloud, RunResult& out) {
  for (const auto& [path, item] : cloud.system.scan(tables::kNodes)) {
    const auto rec = SystemNodeRecord::from_item(path, &item);
    json payload{{"store", "system"},
                 {"exists", rec.exists},
                 {"data", base64_encode(rec.data)},
                 {"children", rec.children},
                 {"pending", rec.pending_transactions},
                 {"locked", rec.lock_ts.has_value()}};
    if (rec.ephemeral_owner) payload["ephemeral_owner"] = *rec.ephemeral_owner;
    cloud.record(EventKind::kFinalState, std::nullopt, rec.mtxid, path, std::move(payload));
    if (rec.exists) out.tree[path] = TreeNode{rec.data, rec.children, rec.ctxid, rec.mtxid, rec.ephemeral_owner};
    if (!rec.pending_transactions.empty() || rec.lock_ts) out.dirty_nodes.push_back(path);
  }
  for (const auto& region : cloud.config.regions) {
    for (const auto& obj : cloud.user.objects(region)) {
      cloud.record(EventKind::kFinalState, std::nullopt, obj.mtxid, obj.path,
                   json{{"store", "region"},
                        {"region", region},
                        {"data", base64_encode(obj.data)},
                        {"children", obj.children},
                        {"epoch", obj.epoch_snapshot}});
      out.replicas[region][obj.path] = obj;
    }
    const auto entries = read_epoch(cloud.system, region);
    json encoded = json::array();
    for (const auto& e : entries) encoded.push_back(e.encode());
    cloud.record(EventKind::kFinalState, std::nullopt, std::nullopt, std::nullopt,
                 json{{"store", "epoch"}, {"region", region}, {"entries", encoded}});
    out.epochs[region] = entries;
  }
  for (const auto& [id, item] : cloud.system.scan(tables::kSessions)) {
    const auto rec = SessionRecord::from_item(id, item);
    cloud.record(EventKind::kFinalState, id, std::nullopt, std::nullopt,
                 json{{"store", "session"}, {"status", to_string(rec.status)}, {"ephemerals", rec.owned_ephemeral_paths}});
    out.sessions[id] = rec.status;
  }
}

}  // namespace

RunResult run_to_quiescence(const ScenarioConfig& input) {
  validate(input);
  const ScenarioConfig config = input;
  RunResult out;
  Scheduler scheduler(config.max_events);
  {
    Cloud cloud(config, scheduler, out.trace);
    std::map<SessionId, std::unique_ptr<ClientSession>> clients;
    for (const auto& s : config.sessions) {
      std::vector<WorkloadOp> ops;
      for (const auto& op : config.workload) {
        if (op.session == s.id) ops.push_back(op);
      }
      std::optional<std::size_t> after;
      for (const auto& u : config.unresponsive) {
        if (u.session == s.id) after = after ? std::min(*after, u.after_ops) : u.after_ops;
      }
      clients.emplace(s.id, std::make_unique<ClientSession>(cloud, s, std::move(ops), after));
    }
    cloud.deliver_response = [&](const SessionId& s, const WriteResponse& r) { clients.at(s)->on_response(r); };
    cloud.deliver_notification = [&](const SessionId& s, const Notification& n) { clients.at(s)->on_notification(n); };
    cloud.answers_ping = [&](const SessionId& s) { return clients.at(s)->answers_ping(); };
    cloud.work_pending = [&] {
      for (const auto& [_, c] : clients) {
        if (!c->quiescent()) return true;
      }
      if (!cloud.queues_idle()) return true;
      for (const auto& [id, item] : cloud.system.scan(tables::kSessions)) {
        const auto rec = SessionRecord::from_item(id, item);
        if (rec.status != SessionStatus::kClosed && !rec.owned_ephemeral_paths.empty()) return true;
      }
      return false;
    };

    seed_stores(cloud);
    for (auto& [_, c] : clients) c->start(config.op_interval_ticks);
    cloud.start_heartbeat();

    scheduler.run();
    scheduler.finalize();

    record_final_state(cloud, out);
    for (const auto& [id, c] : clients) {
      out.results[id] = c->results();
      out.notifications[id] = c->notifications();
    }
    out.faults_fired = cloud.faults.fired();
    out.store_dump = cloud.system.dump() + cloud.user.dump();
    // Clients hold coroutine frames that reference the cloud; drop them first.
    clients.clear();
  }
  out.events = scheduler.dispatched();
  out.end_time = scheduler.now();
  return out;
}

}  // namespace fk
