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

#include <optional>
#include <string>
#include <vector>

#include "fk/cloud.hpp"
#include "fk/protocol.hpp"
#include "fk/queueing.hpp"
#include "fk/storage.hpp"

// Writer, distributor, watch and heartbeat functions.

namespace fk {

/// Validates a write against the locked node (`old_state`) and its parent.
std::optional<FailureReason> is_valid(const WriteRequest& request, const SystemNodeRecord& old_state,
                                      const SystemNodeRecord& parent_state);

/// Watch kinds fired by a node change, ZooKeeper style.
std::vector<WatchKind> fired_kinds(NodeChange change);
WatchEvent watch_event_for(NodeChange change);

/// Name given to the `counter`-th sequential child of `prefix`.
std::string sequential_name(std::string_view prefix, std::uint64_t counter);

/// Registers `session` on the live watch of (path, kind), creating one if needed.
WatchId register_watch(KeyValueStore& store, std::string_view path, WatchKind kind, const SessionId& session);

void start_writer(Cloud& cloud, const SessionId& session, const Batch<WriteRequest>& batch);
void start_distributor(Cloud& cloud, const Batch<DistributorUpdate>& batch);
void start_watch(Cloud& cloud, const RegionName& region, const Batch<WatchDelivery>& batch);
void start_heartbeat(Cloud& cloud);

}  // namespace fk
