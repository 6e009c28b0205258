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

#include <map>
#include <string>
#include <vector>

#include "fk/client.hpp"
#include "fk/scenario.hpp"
#include "fk/storage.hpp"
#include "fk/trace.hpp"

namespace fk {

/// A node of the authoritative tree at quiescence.
struct TreeNode {
  std::string data;
  StrList children;
  Txid ctxid = 0;
  Txid mtxid = 0;
  std::optional<SessionId> ephemeral_owner;

  bool operator==(const TreeNode&) const = default;
};

using Tree = std::map<std::string, TreeNode>;

struct RunResult {
  Trace trace;
  std::map<SessionId, std::vector<OpResult>> results;
  std::map<SessionId, std::vector<Notification>> notifications;
  /// System-store tree (existing nodes only).
  Tree tree;
  std::map<RegionName, std::map<std::string, DataNodeObject>> replicas;
  std::map<RegionName, std::vector<EpochEntry>> epochs;
  std::map<SessionId, SessionStatus> sessions;
  /// Nodes still holding undistributed transactions or a lock.
  std::vector<std::string> dirty_nodes;
  std::size_t events = 0;
  SimTime end_time = 0;
  std::size_t faults_fired = 0;
  std::string store_dump;
};

/// Runs a scenario until no events remain. Throws ScenarioError for an invalid
/// scenario and NonTermination when the event bound is exceeded.
RunResult run_to_quiescence(const ScenarioConfig& config);

}  // namespace fk
