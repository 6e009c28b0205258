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

#include "fk/scenario.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <utility>

namespace fk {

namespace {

using nlohmann::json;

constexpr std::array<std::pair<FunctionKind, std::string_view>, 4> kKinds{{
    {FunctionKind::kWriter, "writer"},
    {FunctionKind::kDistributor, "distributor"},
    {FunctionKind::kWatch, "watch"},
    {FunctionKind::kHeartbeat, "heartbeat"},
}};

constexpr std::array<std::pair<StepLabel, std::string_view>, 14> kLabels{{
    {StepLabel::kBeforeLock, "before-lock"},
    {StepLabel::kAfterLock, "after-lock"},
    {StepLabel::kBeforePush, "before-push"},
    {StepLabel::kBetweenPushAndCommit, "between-push-and-commit"},
    {StepLabel::kAfterCommitBeforeUnlock, "after-commit-before-unlock"},
    {StepLabel::kBeforeTryCommit, "before-trycommit"},
    {StepLabel::kAfterTryCommit, "after-trycommit"},
    {StepLabel::kAfterDataUpdate, "after-dataupdate"},
    {StepLabel::kAfterInvokeWatch, "after-invokewatch"},
    {StepLabel::kBeforePopTransaction, "before-poptransaction"},
    {StepLabel::kBeforeDeliver, "before-deliver"},
    {StepLabel::kAfterDeliver, "after-deliver"},
    {StepLabel::kBeforePing, "before-ping"},
    {StepLabel::kAfterPing, "after-ping"},
}};

constexpr std::array kWriterLabels{StepLabel::kBeforeLock, StepLabel::kAfterLock, StepLabel::kBeforePush,
                                   StepLabel::kBetweenPushAndCommit, StepLabel::kAfterCommitBeforeUnlock};
constexpr std::array kDistributorLabels{StepLabel::kBeforeTryCommit, StepLabel::kAfterTryCommit,
                                        StepLabel::kAfterDataUpdate, StepLabel::kAfterInvokeWatch,
                                        StepLabel::kBeforePopTransaction};
constexpr std::array kWatchLabels{StepLabel::kBeforeDeliver, StepLabel::kAfterDeliver};
constexpr std::array kHeartbeatLabels{StepLabel::kBeforePing, StepLabel::kAfterPing};

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view s) {
  for (const auto& [v, name] : table) {
    if (name == s) return v;
  }
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E e) {
  for (const auto& [v, name] : table) {
    if (v == e) return name;
  }
  return "?";
}

std::string at(const std::string& base, std::string_view key) { return base + "." + std::string(key); }
std::string at(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

std::uint64_t get_u64(const json& obj, std::string_view key, const std::string& where, std::uint64_t fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<std::int64_t>() >= 0)) {
    throw ScenarioError(at(where, key), "expected a non-negative integer");
  }
  return it->get<std::uint64_t>();
}

bool get_bool(const json& obj, std::string_view key, const std::string& where, bool fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) throw ScenarioError(at(where, key), "expected a boolean");
  return it->get<bool>();
}

std::string get_string(const json& obj, std::string_view key, const std::string& where,
                       std::optional<std::string> fallback = std::nullopt) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    if (fallback) return *fallback;
    throw ScenarioError(at(where, key), "missing required field");
  }
  if (!it->is_string()) throw ScenarioError(at(where, key), "expected a string");
  return it->get<std::string>();
}

const json& get_array(const json& obj, std::string_view key, const std::string& where) {
  static const json kEmpty = json::array();
  const auto it = obj.find(key);
  if (it == obj.end()) return kEmpty;
  if (!it->is_array()) throw ScenarioError(at(where, key), "expected an array");
  return *it;
}

WorkloadOp parse_op(const json& j, const std::string& where) {
  if (!j.is_object()) throw ScenarioError(where, "expected an object");
  WorkloadOp op;
  op.session = get_string(j, "session", where);
  const auto name = get_string(j, "op", where);
  const auto code = parse_opcode(name);
  if (!code || *code == Opcode::kDeregister) throw ScenarioError(at(where, "op"), "unknown op '" + name + "'");
  op.op = *code;
  op.path = get_string(j, "path", where);
  try {
    op.data = base64_decode(get_string(j, "data", where, ""));
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(at(where, "data"), e.what());
  }
  for (std::size_t i = 0; const auto& flag : get_array(j, "flags", where)) {
    const auto here = at(at(where, "flags"), i++);
    if (!flag.is_string()) throw ScenarioError(here, "expected a string");
    const auto f = flag.get<std::string>();
    if (f == "ephemeral") {
      op.ephemeral = true;
    } else if (f == "sequential") {
      op.sequential = true;
    } else {
      throw ScenarioError(here, "unknown flag '" + f + "'");
    }
  }
  op.watch = get_bool(j, "watch", where, false);
  if (j.contains("version")) op.version = get_u64(j, "version", where, 0);
  return op;
}

}  // namespace

std::string_view to_string(FunctionKind k) { return name_of(kKinds, k); }
std::optional<FunctionKind> parse_function_kind(std::string_view s) { return lookup(kKinds, s); }
std::string_view to_string(StepLabel l) { return name_of(kLabels, l); }
std::optional<StepLabel> parse_step_label(std::string_view s) { return lookup(kLabels, s); }

std::string_view to_string(FaultMode m) { return m == FaultMode::kCrashBefore ? "crash-before" : "crash-after"; }
std::optional<FaultMode> parse_fault_mode(std::string_view s) {
  if (s == "crash-before" || s == "crash-before-step") return FaultMode::kCrashBefore;
  if (s == "crash-after" || s == "crash-after-step") return FaultMode::kCrashAfter;
  return std::nullopt;
}

std::string_view to_string(QueueMode m) { return m == QueueMode::kAtomicPush ? "atomic-push" : "sequence-number"; }
std::optional<QueueMode> parse_queue_mode(std::string_view s) {
  if (s == "atomic-push") return QueueMode::kAtomicPush;
  if (s == "sequence-number") return QueueMode::kSequenceNumber;
  return std::nullopt;
}

std::span<const StepLabel> step_labels(FunctionKind kind) {
  switch (kind) {
    case FunctionKind::kWriter:
      return kWriterLabels;
    case FunctionKind::kDistributor:
      return kDistributorLabels;
    case FunctionKind::kWatch:
      return kWatchLabels;
    case FunctionKind::kHeartbeat:
      return kHeartbeatLabels;
  }
  return {};
}

FunctionKind owner_of(StepLabel label) {
  for (const auto& [kind, _] : kKinds) {
    const auto labels = step_labels(kind);
    if (std::find(labels.begin(), labels.end(), label) != labels.end()) return kind;
  }
  return FunctionKind::kWriter;
}

const SessionSpec* ScenarioConfig::find_session(std::string_view id) const {
  for (const auto& s : sessions) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

ScenarioConfig parse_scenario(const json& doc) {
  const std::string root = "$";
  if (!doc.is_object()) throw ScenarioError(root, "scenario must be a JSON object");
  ScenarioConfig c;
  c.seed = get_u64(doc, "seed", root, 0);

  if (doc.contains("regions")) {
    c.regions.clear();
    for (std::size_t i = 0; const auto& r : get_array(doc, "regions", root)) {
      if (!r.is_string()) throw ScenarioError(at(at(root, "regions"), i), "expected a string");
      c.regions.push_back(r.get<std::string>());
      ++i;
    }
  }

  for (std::size_t i = 0; const auto& s : get_array(doc, "sessions", root)) {
    const auto where = at(at(root, "sessions"), i++);
    if (s.is_string()) {
      c.sessions.push_back({s.get<std::string>(), c.regions.empty() ? "" : c.regions.front()});
    } else if (s.is_object()) {
      c.sessions.push_back({get_string(s, "id", where), get_string(s, "region", where, c.regions.empty() ? "" : c.regions.front())});
    } else {
      throw ScenarioError(where, "expected a session id or object");
    }
  }

  const auto mode = get_string(doc, "queue_mode", root, "atomic-push");
  const auto qm = parse_queue_mode(mode);
  if (!qm) throw ScenarioError(at(root, "queue_mode"), "unknown queue mode '" + mode + "'");
  c.queue_mode = *qm;

  c.batch_max = get_u64(doc, "batch_max", root, c.batch_max);
  c.lock_max_hold_ticks = get_u64(doc, "lock_max_hold_ticks", root, c.lock_max_hold_ticks);
  c.heartbeat_period_ticks = get_u64(doc, "heartbeat_period_ticks", root, c.heartbeat_period_ticks);
  if (doc.contains("stall_timeout_ticks")) c.stall_timeout_ticks = get_u64(doc, "stall_timeout_ticks", root, 0);
  c.storage_latency_ticks = get_u64(doc, "storage_latency_ticks", root, c.storage_latency_ticks);
  c.queue_latency_ticks = get_u64(doc, "queue_latency_ticks", root, c.queue_latency_ticks);
  c.client_latency_ticks = get_u64(doc, "client_latency_ticks", root, c.client_latency_ticks);
  c.op_interval_ticks = get_u64(doc, "op_interval_ticks", root, c.op_interval_ticks);
  c.jitter_ticks = get_u64(doc, "jitter_ticks", root, c.jitter_ticks);
  c.retry_delay_ticks = get_u64(doc, "retry_delay_ticks", root, c.retry_delay_ticks);
  c.retry_cap = get_u64(doc, "retry_cap", root, c.retry_cap);
  c.duplicate_delivery = get_bool(doc, "duplicate_delivery", root, c.duplicate_delivery);
  c.writer_lock_attempts = get_u64(doc, "writer_lock_attempts", root, c.writer_lock_attempts);
  c.max_events = get_u64(doc, "max_events", root, c.max_events);

  for (std::size_t i = 0; const auto& f : get_array(doc, "faults", root)) {
    const auto where = at(at(root, "faults"), i++);
    if (!f.is_object()) throw ScenarioError(where, "expected an object");
    FaultSpec spec;
    const auto target = get_string(f, "target", where);
    const auto kind = parse_function_kind(target);
    if (!kind) throw ScenarioError(at(where, "target"), "unknown function kind '" + target + "'");
    spec.target = *kind;
    const auto point = get_string(f, "point", where);
    const auto label = parse_step_label(point);
    if (!label) throw ScenarioError(at(where, "point"), "unknown step label '" + point + "'");
    spec.point = *label;
    spec.occurrence = get_u64(f, "occurrence", where, 1);
    const auto m = get_string(f, "mode", where, "crash-before");
    const auto fm = parse_fault_mode(m);
    if (!fm) throw ScenarioError(at(where, "mode"), "unknown fault mode '" + m + "'");
    spec.mode = *fm;
    c.faults.push_back(spec);
  }

  for (std::size_t i = 0; const auto& u : get_array(doc, "unresponsive", root)) {
    const auto where = at(at(root, "unresponsive"), i++);
    if (!u.is_object()) throw ScenarioError(where, "expected an object");
    c.unresponsive.push_back({get_string(u, "session", where), get_u64(u, "after_ops", where, 0)});
  }

  for (std::size_t i = 0; const auto& op : get_array(doc, "workload", root)) {
    c.workload.push_back(parse_op(op, at(at(root, "workload"), i++)));
  }

  validate(c);
  return c;
}

ScenarioConfig parse_scenario_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError("$", std::string("malformed JSON: ") + e.what());
  }
  return parse_scenario(doc);
}

void validate(const ScenarioConfig& c) {
  if (c.regions.empty()) throw ScenarioError("$.regions", "at least one region is required");
  std::set<std::string> seen_regions;
  for (std::size_t i = 0; i < c.regions.size(); ++i) {
    if (c.regions[i].empty()) throw ScenarioError(at("$.regions", i), "empty region name");
    if (!seen_regions.insert(c.regions[i]).second) throw ScenarioError(at("$.regions", i), "duplicate region");
  }
  std::set<std::string> seen_sessions;
  for (std::size_t i = 0; i < c.sessions.size(); ++i) {
    const auto where = at("$.sessions", i);
    if (c.sessions[i].id.empty()) throw ScenarioError(where, "empty session id");
    if (!seen_sessions.insert(c.sessions[i].id).second) throw ScenarioError(where, "duplicate session id");
    if (!seen_regions.contains(c.sessions[i].region)) {
      throw ScenarioError(at(where, "region"), "undeclared region '" + c.sessions[i].region + "'");
    }
  }
  if (c.batch_max == 0) throw ScenarioError("$.batch_max", "must be positive");
  if (c.lock_max_hold_ticks == 0) throw ScenarioError("$.lock_max_hold_ticks", "must be positive");
  if (c.heartbeat_period_ticks == 0) throw ScenarioError("$.heartbeat_period_ticks", "must be positive");
  if (c.storage_latency_ticks == 0 || c.queue_latency_ticks == 0 || c.client_latency_ticks == 0) {
    throw ScenarioError("$", "service latencies must be positive");
  }
  if (c.writer_lock_attempts == 0) throw ScenarioError("$.writer_lock_attempts", "must be positive");

  for (std::size_t i = 0; i < c.faults.size(); ++i) {
    const auto where = at("$.faults", i);
    const auto& f = c.faults[i];
    const auto labels = step_labels(f.target);
    if (std::find(labels.begin(), labels.end(), f.point) == labels.end()) {
      throw ScenarioError(at(where, "point"), "step '" + std::string(to_string(f.point)) + "' is not a step of the " +
                                                  std::string(to_string(f.target)) + " function");
    }
    if (f.point == StepLabel::kBetweenPushAndCommit && c.queue_mode == QueueMode::kAtomicPush) {
      throw ScenarioError(at(where, "point"),
                          "unreachable in atomic-push mode: push and txid assignment are one atomic step");
    }
    if (f.occurrence == 0) throw ScenarioError(at(where, "occurrence"), "must be at least 1");
  }

  for (std::size_t i = 0; i < c.unresponsive.size(); ++i) {
    if (!seen_sessions.contains(c.unresponsive[i].session)) {
      throw ScenarioError(at(at("$.unresponsive", i), "session"), "undeclared session");
    }
  }

  for (std::size_t i = 0; i < c.workload.size(); ++i) {
    const auto where = at("$.workload", i);
    const auto& op = c.workload[i];
    if (!seen_sessions.contains(op.session)) {
      throw ScenarioError(at(where, "session"), "undeclared session '" + op.session + "'");
    }
    if (!is_valid_path(op.path)) throw ScenarioError(at(where, "path"), "invalid node path '" + op.path + "'");
    if (op.path == "/" && is_write(op.op)) throw ScenarioError(at(where, "path"), "the root node is read-only");
    if ((op.ephemeral || op.sequential) && op.op != Opcode::kCreate) {
      throw ScenarioError(at(where, "flags"), "flags apply to create only");
    }
    if (op.watch && is_write(op.op)) throw ScenarioError(at(where, "watch"), "watches are set by reads only");
    if (op.version && op.op != Opcode::kSetData && op.op != Opcode::kDelete) {
      throw ScenarioError(at(where, "version"), "version applies to set_data and delete only");
    }
  }
}

nlohmann::json to_json(const ScenarioConfig& c) {
  json doc;
  doc["seed"] = c.seed;
  doc["regions"] = c.regions;
  doc["sessions"] = json::array();
  for (const auto& s : c.sessions) doc["sessions"].push_back({{"id", s.id}, {"region", s.region}});
  doc["queue_mode"] = to_string(c.queue_mode);
  doc["batch_max"] = c.batch_max;
  doc["lock_max_hold_ticks"] = c.lock_max_hold_ticks;
  doc["heartbeat_period_ticks"] = c.heartbeat_period_ticks;
  if (c.stall_timeout_ticks) doc["stall_timeout_ticks"] = *c.stall_timeout_ticks;
  doc["storage_latency_ticks"] = c.storage_latency_ticks;
  doc["queue_latency_ticks"] = c.queue_latency_ticks;
  doc["client_latency_ticks"] = c.client_latency_ticks;
  doc["op_interval_ticks"] = c.op_interval_ticks;
  doc["jitter_ticks"] = c.jitter_ticks;
  doc["retry_delay_ticks"] = c.retry_delay_ticks;
  doc["retry_cap"] = c.retry_cap;
  doc["duplicate_delivery"] = c.duplicate_delivery;
  doc["writer_lock_attempts"] = c.writer_lock_attempts;
  doc["max_events"] = c.max_events;
  doc["faults"] = json::array();
  for (const auto& f : c.faults) {
    doc["faults"].push_back({{"target", to_string(f.target)},
                             {"point", to_string(f.point)},
                             {"occurrence", f.occurrence},
                             {"mode", to_string(f.mode)}});
  }
  doc["unresponsive"] = json::array();
  for (const auto& u : c.unresponsive) doc["unresponsive"].push_back({{"session", u.session}, {"after_ops", u.after_ops}});
  doc["workload"] = json::array();
  for (const auto& op : c.workload) {
    json j{{"session", op.session}, {"op", to_string(op.op)}, {"path", op.path}};
    if (!op.data.empty()) j["data"] = base64_encode(op.data);
    json flags = json::array();
    if (op.ephemeral) flags.push_back("ephemeral");
    if (op.sequential) flags.push_back("sequential");
    if (!flags.empty()) j["flags"] = flags;
    if (op.watch) j["watch"] = true;
    if (op.version) j["version"] = *op.version;
    doc["workload"].push_back(std::move(j));
  }
  return doc;
}

}  // namespace fk
