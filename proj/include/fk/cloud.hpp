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

#include <coroutine>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "fk/protocol.hpp"
#include "fk/queueing.hpp"
#include "fk/scenario.hpp"
#include "fk/scheduler.hpp"
#include "fk/storage.hpp"
#include "fk/task.hpp"
#include "fk/trace.hpp"

// The simulated deployment: stores, queues, fault schedule and the plumbing
// that runs protocol functions as crashable coroutines.

namespace fk {

class FaultInjector {
 public:
  explicit FaultInjector(std::vector<FaultSpec> specs) : specs_(std::move(specs)), fired_(specs_.size(), false) {}

  /// Counts one arrival of `kind` at `label` and returns the fault to apply, if any.
  std::optional<FaultMode> hit(FunctionKind kind, StepLabel label);
  std::size_t fired() const;
  std::uint64_t arrivals(StepLabel label) const;

 private:
  std::vector<FaultSpec> specs_;
  std::vector<bool> fired_;
  std::map<StepLabel, std::uint64_t> arrivals_;
};

/// Raised inside a function body to abandon the invocation; the queue retries it.
class InvocationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Cloud;

/// One function invocation. The body is a coroutine that suspends at every
/// simulated service call, which is where injected crashes take effect.
class Invocation : public std::enable_shared_from_this<Invocation> {
 public:
  using Finish = std::function<void(InvocationOutcome)>;

  Invocation(Cloud& cloud, std::uint64_t id, FunctionKind kind, std::string queue, std::optional<SessionId> session,
             Finish finish);

  void start(Task<void> body, nlohmann::json batch);

  struct Sleep {
    Invocation* inv;
    SimTime ticks;
    bool await_ready() const noexcept { return false; }
    void await_suspend(std::coroutine_handle<> h);
    void await_resume() const noexcept {}
  };

  struct Point {
    Invocation* inv;
    StepLabel label;
    bool await_ready();
    void await_suspend(std::coroutine_handle<> h);
    void await_resume() const noexcept {}
  };

  Sleep sleep(SimTime ticks) { return Sleep{this, ticks}; }
  /// Latency of one storage or queue call. Callers perform the call first and
  /// then await this, so a crash-after fault lands behind the completed call.
  Sleep io();
  /// Latency of one message to a client.
  Sleep hop();
  Point point(StepLabel label) { return Point{this, label}; }

  std::uint64_t id() const { return id_; }
  FunctionKind kind() const { return kind_; }
  Cloud& cloud() { return cloud_; }

 private:
  void crash(std::string reason, std::optional<StepLabel> label);
  void settle();
  void end(InvocationOutcome outcome);

  Cloud& cloud_;
  std::uint64_t id_;
  FunctionKind kind_;
  std::string queue_;
  std::optional<SessionId> session_;
  Finish finish_;
  Task<void> body_;
  std::shared_ptr<bool> alive_ = std::make_shared<bool>(true);
  bool crash_armed_ = false;
  std::optional<StepLabel> armed_label_;
  bool ended_ = false;
};

class Cloud {
 public:
  Cloud(const ScenarioConfig& config, Scheduler& scheduler, Trace& trace);
  Cloud(const Cloud&) = delete;
  Cloud& operator=(const Cloud&) = delete;
  ~Cloud();

  const ScenarioConfig& config;
  Scheduler& scheduler;
  Trace& trace;
  KeyValueStore system;
  UserStore user;
  FaultInjector faults;

  SimTime now() const { return scheduler.now(); }
  /// `base` plus uniform jitter from the scenario RNG.
  SimTime latency(SimTime base);
  std::uint64_t next_token() { return ++token_; }
  bool coin(double p);

  const TraceEvent& record(EventKind kind, std::optional<SessionId> session = std::nullopt,
                           std::optional<Txid> txid = std::nullopt, std::optional<std::string> path = std::nullopt,
                           nlohmann::json payload = nlohmann::json::object());

  const RegionName& region_of(const SessionId& session) const;

  FifoQueue<WriteRequest>& writer_queue(const SessionId& session);
  FifoQueue<DistributorUpdate>& distributor_queue() { return *distributor_; }
  FifoQueue<WatchDelivery>& watch_queue(const RegionName& region);
  bool queues_idle() const;

  std::shared_ptr<Invocation> invoke(FunctionKind kind, std::string queue, std::optional<SessionId> session,
                                     Invocation::Finish finish);
  void forget(std::uint64_t invocation_id) { active_.erase(invocation_id); }
  std::size_t active_invocations() const { return active_.size(); }

  /// Sends a write result; it reaches the client one client hop later.
  void respond(const SessionId& session, WriteResponse response);

  // Client endpoints, installed by the simulator.
  std::function<void(const SessionId&, const WriteResponse&)> deliver_response;
  std::function<void(const SessionId&, const Notification&)> deliver_notification;
  std::function<bool(const SessionId&)> answers_ping;
  std::function<bool()> work_pending;

  void start_heartbeat();

 private:
  template <typename P>
  void wire_hooks(FifoQueue<P>& q, const std::string& name);

  std::mt19937_64 rng_;
  std::uint64_t token_ = 0;
  std::uint64_t next_invocation_ = 0;
  std::map<SessionId, RegionName> regions_;
  std::map<SessionId, std::unique_ptr<FifoQueue<WriteRequest>>> writers_;
  std::unique_ptr<FifoQueue<DistributorUpdate>> distributor_;
  std::map<RegionName, std::unique_ptr<FifoQueue<WatchDelivery>>> watchers_;
  std::map<std::uint64_t, std::shared_ptr<Invocation>> active_;
};

/// JSON form of a batch, as recorded in invoke-start events.
nlohmann::json describe_batch(const Batch<WriteRequest>& b);
nlohmann::json describe_batch(const Batch<DistributorUpdate>& b);
nlohmann::json describe_batch(const Batch<WatchDelivery>& b);

}  // namespace fk
