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

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fk/common.hpp"

namespace fk {

enum class EventKind {
  kEnqueue,
  kInvokeStart,
  kInvokeCrash,
  kInvokeComplete,
  kStorageRead,
  kStorageWrite,
  kCommit,
  kNotifySent,
  kNotifyReceived,
  kClientReadObserve,
  kClientResult,
  kSessionEvicted,
  kSessionOpen,
  kSessionClosed,
  kDeadLetter,
  kFinalState,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view s);

struct TraceEvent {
  std::size_t index = 0;
  SimTime time = 0;
  EventKind kind = EventKind::kEnqueue;
  std::optional<SessionId> session;
  std::optional<Txid> txid;
  std::optional<std::string> path;
  nlohmann::json payload = nlohmann::json::object();

  bool operator==(const TraceEvent&) const = default;
};

/// Totally ordered record of a simulation run.
///
/// Serialized as one tab-separated line per event:
///   index, time, kind, session, txid, path, payload
/// where absent optional fields print as "-" and the payload is compact JSON
/// with sorted keys, so identical runs serialize byte-for-byte identically.
class Trace {
 public:
  const TraceEvent& record(SimTime time, EventKind kind, std::optional<SessionId> session, std::optional<Txid> txid,
                           std::optional<std::string> path, nlohmann::json payload = nlohmann::json::object());

  /// Appends an already-built event, renumbering it. Used by fixture builders.
  const TraceEvent& append(TraceEvent event);

  const std::vector<TraceEvent>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  const TraceEvent& operator[](std::size_t i) const { return events_[i]; }

  std::string serialize() const;
  void write(std::ostream& out) const;
  /// Throws std::runtime_error with the offending line number on malformed input.
  static Trace parse(std::istream& in);
  static Trace parse(std::string_view text);

 private:
  std::vector<TraceEvent> events_;
};

std::string serialize_event(const TraceEvent& event);

}  // namespace fk
