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

#include <list>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fk/cloud.hpp"
#include "fk/protocol.hpp"
#include "fk/scenario.hpp"
#include "fk/task.hpp"

namespace fk {

/// What the application sees for one submitted operation.
struct OpResult {
  std::uint64_t ticket = 0;
  Opcode op = Opcode::kGetData;
  std::string path;
  bool success = false;
  std::optional<FailureReason> reason;
  std::optional<Txid> txid;
  /// Path actually written (sequential creates append a counter).
  std::string result_path;
  // Read results.
  bool exists = false;
  std::string data;
  StrList children;
  Txid version = 0;
  /// Rejected by the client library without reaching the service.
  bool local = false;

  bool operator==(const OpResult&) const = default;
};

/// Client-side session: submits the workload, orders results, tracks MRD and
/// holds back reads (and write results) that could reveal data newer than a
/// watch notification still in flight.
class ClientSession {
 public:
  ClientSession(Cloud& cloud, SessionSpec spec, std::vector<WorkloadOp> ops,
                std::optional<std::size_t> unresponsive_after);
  ClientSession(const ClientSession&) = delete;
  ClientSession& operator=(const ClientSession&) = delete;

  void start(SimTime delay);

  void on_response(const WriteResponse& response);
  void on_notification(const Notification& notification);
  bool answers_ping() const { return !silent_; }

  /// Nothing left to submit and every submitted operation has a result.
  bool quiescent() const;

  const SessionId& id() const { return spec_.id; }
  const RegionName& region() const { return spec_.region; }
  Txid mrd() const { return mrd_; }
  const std::vector<OpResult>& results() const { return results_; }
  const std::vector<Notification>& notifications() const { return notifications_; }
  bool closed() const { return closed_; }

 private:
  struct Pending {
    std::uint64_t ticket = 0;
    WorkloadOp op;
    bool is_read = false;
    bool resolved = false;  // response or fetch arrived
    std::optional<WriteResponse> response;
    std::optional<DataNodeObject> object;
    bool timed_out = false;
    std::optional<FailureReason> local_failure;
  };

  void tick();
  void submit(const WorkloadOp& op);
  Task<void> read(std::uint64_t ticket);
  void arm_timeout(std::uint64_t ticket);
  bool blocked_by_watches(const std::vector<WatchId>& snapshot) const;
  void try_deliver();
  void deliver(Pending& p);
  void resume_submission();

  Cloud& cloud_;
  SessionSpec spec_;
  std::vector<WorkloadOp> ops_;
  std::optional<std::size_t> unresponsive_after_;

  std::size_t next_ = 0;
  std::size_t submitted_ = 0;
  std::uint64_t next_ticket_ = 0;
  bool close_submitted_ = false;
  bool silent_ = false;
  bool closed_ = false;
  bool waiting_ = false;
  bool read_in_flight_ = false;

  SimTime last_send_at_ = 0;
  Txid mrd_ = 0;
  std::map<std::uint64_t, Pending> pending_;
  std::set<std::pair<WatchId, Txid>> notification_log_;
  std::set<WatchId> awaiting_;
  std::vector<OpResult> results_;
  std::vector<Notification> notifications_;
  std::list<Task<void>> tasks_;
};

}  // namespace fk
