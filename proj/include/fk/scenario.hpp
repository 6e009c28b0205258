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

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fk/common.hpp"

namespace fk {

enum class FunctionKind { kWriter, kDistributor, kWatch, kHeartbeat };

/// Crash-injection points. Each belongs to exactly one function kind.
enum class StepLabel {
  kBeforeLock,
  kAfterLock,
  kBeforePush,
  kBetweenPushAndCommit,
  kAfterCommitBeforeUnlock,
  kBeforeTryCommit,
  kAfterTryCommit,
  kAfterDataUpdate,
  kAfterInvokeWatch,
  kBeforePopTransaction,
  kBeforeDeliver,
  kAfterDeliver,
  kBeforePing,
  kAfterPing,
};

/// crash-before stops the invocation at the point; crash-after lets the next
/// storage or queue action after the point complete, then stops it.
enum class FaultMode { kCrashBefore, kCrashAfter };

enum class QueueMode { kAtomicPush, kSequenceNumber };

std::string_view to_string(FunctionKind k);
std::optional<FunctionKind> parse_function_kind(std::string_view s);
std::string_view to_string(StepLabel l);
std::optional<StepLabel> parse_step_label(std::string_view s);
std::string_view to_string(FaultMode m);
std::optional<FaultMode> parse_fault_mode(std::string_view s);
std::string_view to_string(QueueMode m);
std::optional<QueueMode> parse_queue_mode(std::string_view s);

/// Published step set of a function kind.
std::span<const StepLabel> step_labels(FunctionKind kind);
FunctionKind owner_of(StepLabel label);

struct FaultSpec {
  FunctionKind target = FunctionKind::kWriter;
  StepLabel point = StepLabel::kBeforeLock;
  /// 1-based: crash on the n-th time any invocation of `target` reaches `point`.
  std::uint64_t occurrence = 1;
  FaultMode mode = FaultMode::kCrashBefore;

  bool operator==(const FaultSpec&) const = default;
};

struct SessionSpec {
  SessionId id;
  RegionName region;
};

/// The session stops submitting operations and stops answering heartbeats
/// after it has submitted `after_ops` operations.
struct UnresponsiveSpec {
  SessionId session;
  std::size_t after_ops = 0;
};

struct WorkloadOp {
  SessionId session;
  Opcode op = Opcode::kGetData;
  std::string path;
  std::string data;
  bool ephemeral = false;
  bool sequential = false;
  bool watch = false;
  std::optional<Txid> version;
};

struct ScenarioConfig {
  std::uint64_t seed = 0;
  std::vector<RegionName> regions{"region-a"};
  std::vector<SessionSpec> sessions;
  QueueMode queue_mode = QueueMode::kAtomicPush;
  std::size_t batch_max = 10;
  SimTime lock_max_hold_ticks = 100;
  SimTime heartbeat_period_ticks = 50;
  std::optional<SimTime> stall_timeout_ticks;
  std::vector<FaultSpec> faults;
  std::vector<UnresponsiveSpec> unresponsive;
  std::vector<WorkloadOp> workload;

  SimTime storage_latency_ticks = 1;
  SimTime queue_latency_ticks = 1;
  SimTime client_latency_ticks = 1;
  SimTime op_interval_ticks = 1;
  /// Extra random latency in [0, jitter] added to every simulated service call.
  SimTime jitter_ticks = 0;
  SimTime retry_delay_ticks = 1;
  /// Deliveries per message before it is dead-lettered; 0 means unlimited.
  std::uint64_t retry_cap = 0;
  /// Redeliver some successfully processed batches (at-least-once delivery).
  bool duplicate_delivery = false;
  std::size_t writer_lock_attempts = 3;
  std::size_t max_events = 1'000'000;

  SimTime stall_timeout() const { return stall_timeout_ticks.value_or(10 * heartbeat_period_ticks); }
  const SessionSpec* find_session(std::string_view id) const;
};

/// Validation or parse failure. what() starts with the JSON field path.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

ScenarioConfig parse_scenario(const nlohmann::json& doc);
ScenarioConfig parse_scenario_text(std::string_view text);
nlohmann::json to_json(const ScenarioConfig& config);
/// Throws ScenarioError on the first violated rule.
void validate(const ScenarioConfig& config);

}  // namespace fk
